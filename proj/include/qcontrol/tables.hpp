#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qcontrol/analysis.hpp"

namespace qcontrol {

/// %.17g, so values round-trip exactly.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Splits on commas; no quoting (every table here is numeric).
CsvTable parse_csv(const std::string& text);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Writes `text` to a sibling temporary file and renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Appends rows to a CSV file, flushing after each one so a failed sweep
/// leaves the completed rows on disk.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& header);
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

struct CsvSchema {
  const char* name;
  const char* header;
};

inline constexpr CsvSchema kProtocolCsv{"qcontrol.protocol/1", "t_start,t_end,u"};
inline constexpr CsvSchema kPhiCsv{"qcontrol.phi/1", kSweepCsvHeader};
inline constexpr CsvSchema kTraceCsv{"qcontrol.trace/1", "iter,J,grad_norm,step_size"};
inline constexpr CsvSchema kPScalingCsv{"qcontrol.sweep.pscaling/1", "p,e_qaoa,e_gd,quotient,converged"};
inline constexpr CsvSchema kLambdaCsv{"qcontrol.sweep.lambda/1", "t_f,hbb_median,hbb_spread,J,unconstrained,converged"};
inline constexpr CsvSchema kBangLenCsv{"qcontrol.sweep.banglen/1", "t_f,initial_bang,final_bang,converged"};

std::vector<std::string> csv_fields(const PScalingRow& r);
std::vector<std::string> csv_fields(const LambdaRow& r);
std::vector<std::string> csv_fields(const BangLengthRow& r);

/// Checks every known file in a run directory against its schema. Returns
/// one message per problem; empty means valid.
std::vector<std::string> check_run_directory(const std::filesystem::path& dir);

}  // namespace qcontrol
