#include "gda/io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace gda {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

void write_header(std::ofstream& out, int d, bool labeled) {
  for (int i = 0; i < d; ++i) {
    if (i) out << ',';
    out << 'x' << i;
  }
  if (labeled) out << ",y";
  out << '\n';
}

struct ParsedCsv {
  std::vector<Vec> xs;
  std::vector<int> ys;
  bool labeled = false;
};

ParsedCsv parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ":1: missing header");
  auto header = split(line, ',');
  ParsedCsv parsed;
  parsed.labeled = !header.empty() && header.back() == "y";
  const int d = static_cast<int>(header.size()) - (parsed.labeled ? 1 : 0);
  if (d < 1) throw DataError(path + ":1: no feature columns in header");
  for (int i = 0; i < d; ++i)
    if (header[static_cast<size_t>(i)] != "x" + std::to_string(i))
      throw DataError(path + ":1: expected column x" + std::to_string(i) + ", got " +
                      header[static_cast<size_t>(i)]);

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (static_cast<int>(fields.size()) != d + (parsed.labeled ? 1 : 0))
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(d + (parsed.labeled ? 1 : 0)) + " fields, got " +
                      std::to_string(fields.size()));
    Vec x(d);
    try {
      for (int i = 0; i < d; ++i) x[i] = std::stod(fields[static_cast<size_t>(i)]);
      if (parsed.labeled) {
        int y = std::stoi(fields.back());
        if (y != 1 && y != -1)
          throw DataError(path + ":" + std::to_string(line_no) + ": label must be -1 or 1");
        parsed.ys.push_back(y);
      }
    } catch (const DataError&) {
      throw;
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed number");
    }
    parsed.xs.push_back(std::move(x));
  }
  return parsed;
}

}  // namespace

void write_labeled_csv(const std::string& path, const std::vector<LabeledPoint>& points) {
  if (points.empty()) throw DataError(path + ": nothing to write");
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << std::setprecision(17);
  write_header(out, static_cast<int>(points.front().x.size()), true);
  for (const auto& p : points) {
    for (Eigen::Index i = 0; i < p.x.size(); ++i) out << p.x[i] << ',';
    out << p.y << '\n';
  }
}

void write_unlabeled_csv(const std::string& path, const std::vector<Vec>& points) {
  if (points.empty()) throw DataError(path + ": nothing to write");
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << std::setprecision(17);
  write_header(out, static_cast<int>(points.front().size()), false);
  for (const auto& x : points) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (i) out << ',';
      out << x[i];
    }
    out << '\n';
  }
}

std::vector<LabeledPoint> read_labeled_csv(const std::string& path) {
  auto parsed = parse_csv(path);
  if (!parsed.labeled) throw DataError(path + ": expected a labeled file (y column)");
  std::vector<LabeledPoint> out;
  out.reserve(parsed.xs.size());
  for (size_t i = 0; i < parsed.xs.size(); ++i)
    out.push_back({std::move(parsed.xs[i]), parsed.ys[i]});
  return out;
}

std::vector<Vec> read_unlabeled_csv(const std::string& path) {
  auto parsed = parse_csv(path);
  if (parsed.labeled) throw DataError(path + ": expected an unlabeled file (no y column)");
  return std::move(parsed.xs);
}

bool csv_is_labeled(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ":1: missing header");
  auto header = split(line, ',');
  return !header.empty() && header.back() == "y";
}

DiscreteDistribution read_csv_distribution(const std::string& path) {
  auto parsed = parse_csv(path);
  if (parsed.xs.empty()) throw DataError(path + ": no data rows");
  std::vector<LabeledPoint> pts;
  pts.reserve(parsed.xs.size());
  for (size_t i = 0; i < parsed.xs.size(); ++i)
    pts.push_back({std::move(parsed.xs[i]), parsed.labeled ? parsed.ys[i] : 1});
  return empirical_distribution(pts);
}

void export_sequence(const DomainSequence& seq, const std::string& dir) {
  fs::create_directories(dir);
  write_labeled_csv(dir + "/source.csv", seq.source_labeled);
  for (size_t i = 0; i < seq.intermediate_unlabeled.size(); ++i) {
    std::ostringstream name;
    name << dir << "/inter_" << std::setw(4) << std::setfill('0') << (i + 1) << ".csv";
    write_unlabeled_csv(name.str(), seq.intermediate_unlabeled[i]);
  }
  if (!seq.target_unlabeled.empty())
    write_unlabeled_csv(dir + "/target_unlabeled.csv", seq.target_unlabeled);
  write_labeled_csv(dir + "/target_eval.csv", seq.target_eval);
  nlohmann::json meta = {{"generator", seq.meta.generator},
                         {"params", seq.meta.params},
                         {"seed", seq.meta.seed},
                         {"flat_pool", seq.meta.flat_pool},
                         {"n_intermediate_domains", seq.intermediate_unlabeled.size()}};
  write_json_file(dir + "/meta.json", meta);
}

DomainSequence import_sequence(const std::string& dir) {
  DomainSequence seq;
  seq.source_labeled = read_labeled_csv(dir + "/source.csv");
  for (size_t i = 1;; ++i) {
    std::ostringstream name;
    name << dir << "/inter_" << std::setw(4) << std::setfill('0') << i << ".csv";
    if (!fs::exists(name.str())) break;
    seq.intermediate_unlabeled.push_back(read_unlabeled_csv(name.str()));
  }
  if (fs::exists(dir + "/target_unlabeled.csv"))
    seq.target_unlabeled = read_unlabeled_csv(dir + "/target_unlabeled.csv");
  seq.target_eval = read_labeled_csv(dir + "/target_eval.csv");
  auto meta = load_json_file(dir + "/meta.json");
  seq.meta.generator = meta.value("generator", "imported");
  seq.meta.params = meta.value("params", nlohmann::json::object());
  seq.meta.seed = meta.value("seed", std::uint64_t{0});
  seq.meta.flat_pool = meta.value("flat_pool", false);
  return seq;
}

void reject_unknown_keys(const nlohmann::json& j,
                         const std::map<std::string, std::set<std::string>>& allowed,
                         const std::string& path) {
  if (!j.is_object()) return;
  auto it = allowed.find(path);
  if (it == allowed.end()) return;
  for (const auto& [key, value] : j.items()) {
    if (!it->second.count(key))
      throw DataError("config: unknown key '" + (path.empty() ? key : path + "." + key) +
                      "'");
    reject_unknown_keys(value, allowed, path.empty() ? key : path + "." + key);
  }
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << j.dump(2) << '\n';
}

}  // namespace gda
