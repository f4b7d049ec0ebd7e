#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gda/distributions.hpp"
#include "json.hpp"

namespace gda {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// CSV point clouds: header "x0,x1,...,x{d-1},y", one row per point,
/// y in {-1,1}. Unlabeled files omit the y column.
void write_labeled_csv(const std::string& path, const std::vector<LabeledPoint>& points);
void write_unlabeled_csv(const std::string& path, const std::vector<Vec>& points);

std::vector<LabeledPoint> read_labeled_csv(const std::string& path);
std::vector<Vec> read_unlabeled_csv(const std::string& path);

/// True if the file's header carries the trailing y column.
bool csv_is_labeled(const std::string& path);

/// Reads a CSV point cloud into a uniform-mass distribution; unlabeled files
/// get the placeholder label +1.
DiscreteDistribution read_csv_distribution(const std::string& path);

/// Directory layout: source.csv, inter_0001.csv..., target_unlabeled.csv
/// (when present), target_eval.csv, meta.json.
void export_sequence(const DomainSequence& seq, const std::string& dir);
DomainSequence import_sequence(const std::string& dir);

/// Rejects unknown keys anywhere in the object tree; `allowed` maps a
/// dotted path ("" for the root) to its allowed key set.
void reject_unknown_keys(const nlohmann::json& j,
                         const std::map<std::string, std::set<std::string>>& allowed,
                         const std::string& path = "");

nlohmann::json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace gda
