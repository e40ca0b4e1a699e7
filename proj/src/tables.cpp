#include "qcontrol/tables.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "qcontrol/instance.hpp"

namespace qcontrol {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

void check_csv(const fs::path& file, const std::vector<CsvSchema>& allowed, std::vector<std::string>& problems) {
  CsvTable t;
  try {
    t = read_csv_file(file);
  } catch (const std::exception& e) {
    problems.push_back(file.filename().string() + ": " + e.what());
    return;
  }
  const CsvSchema* match = nullptr;
  for (const auto& s : allowed) {
    if (split(s.header) == t.header) match = &s;
  }
  if (!match) {
    problems.push_back(file.filename().string() + ": unrecognized header");
    return;
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != t.header.size()) {
      problems.push_back(file.filename().string() + ": row " + std::to_string(r + 1) + " has " +
                         std::to_string(t.rows[r].size()) + " fields, expected " + std::to_string(t.header.size()));
      continue;
    }
    for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
      if (!is_number(t.rows[r][c])) {
        problems.push_back(file.filename().string() + ": row " + std::to_string(r + 1) + " column '" + t.header[c] +
                           "' is not numeric");
      }
    }
  }
}

void check_json(const fs::path& file, std::vector<std::string>& problems, nlohmann::json* out = nullptr) {
  try {
    nlohmann::json doc = nlohmann::json::parse(read_text(file));
    const std::string name = file.filename().string();
    if (name == "bangs.json") {
      bangs_from_json(doc);
    } else if (name == "structure.json") {
      if (doc.value("schema", "") != kStructureSchema) problems.push_back(name + ": wrong schema");
    } else if (name == "manifest.json") {
      if (doc.value("schema", "") != "qcontrol.manifest/1") problems.push_back(name + ": wrong schema");
    } else {
      instance_from_json(doc);
    }
    if (out) *out = std::move(doc);
  } catch (const std::exception& e) {
    problems.push_back(file.filename().string() + ": " + e.what());
  }
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CsvTable t;
  if (!std::getline(in, line) || line.empty()) throw std::invalid_argument("CSV is missing its header line");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
  }
  return t;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_csv_file(const fs::path& path) { return parse_csv(read_text(path)); }

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

CsvWriter::CsvWriter(const fs::path& path, const std::string& header)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(split(header).size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  out_ << header << '\n' << std::flush;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw std::logic_error("CSV row width does not match its header");
  for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
  out_ << '\n' << std::flush;
}

std::vector<std::string> csv_fields(const PScalingRow& r) {
  return {std::to_string(r.p), format_double(r.e_qaoa), format_double(r.e_gd), format_double(r.quotient),
          r.converged ? "1" : "0"};
}

std::vector<std::string> csv_fields(const LambdaRow& r) {
  return {format_double(r.t_f), format_double(r.hbb_median), format_double(r.hbb_spread), format_double(r.J),
          r.unconstrained ? "1" : "0", r.converged ? "1" : "0"};
}

std::vector<std::string> csv_fields(const BangLengthRow& r) {
  return {format_double(r.t_f), format_double(r.initial_bang), format_double(r.final_bang), r.converged ? "1" : "0"};
}

std::vector<std::string> check_run_directory(const fs::path& dir) {
  std::vector<std::string> problems;
  if (!fs::is_directory(dir)) return {dir.string() + " is not a directory"};
  bool any = false;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name == "protocol.csv") {
      check_csv(entry.path(), {kProtocolCsv}, problems);
    } else if (name == "phi.csv") {
      check_csv(entry.path(), {kPhiCsv}, problems);
    } else if (name == "trace.csv") {
      check_csv(entry.path(), {kTraceCsv}, problems);
    } else if (name == "sweep.csv") {
      check_csv(entry.path(), {kPScalingCsv, kLambdaCsv, kBangLenCsv}, problems);
    } else if (name == "bangs.json" || name == "structure.json" || name.ends_with(".instance.json")) {
      check_json(entry.path(), problems);
    } else if (name == "manifest.json") {
      nlohmann::json doc;
      check_json(entry.path(), problems, &doc);
      if (doc.is_object() && doc.contains("outputs")) {
        for (const auto& f : doc.at("outputs")) {
          if (!fs::exists(dir / f.get<std::string>())) {
            problems.push_back("manifest.json lists missing output " + f.get<std::string>());
          }
        }
      }
    } else {
      continue;
    }
    any = true;
  }
  if (!any) problems.push_back(dir.string() + " contains no recognized output files");
  if (any && !fs::exists(dir / "manifest.json")) problems.push_back("manifest.json is missing");
  return problems;
}

}  // namespace qcontrol
