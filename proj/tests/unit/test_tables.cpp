#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "qcontrol/tables.hpp"

using namespace qcontrol;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "qcontrol_unit" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

const char* kManifest = R"({"schema": "qcontrol.manifest/1", "command": "x", "argv": [], "config": {}, "outputs": []})";

}  // namespace

TEST_SUITE("tables") {
  TEST_CASE("doubles round trip through text") {
    for (double v : {0.1, 1.0 / 3.0, -6.400815412345678, 1e-300, 2.0}) CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(2.0) == "2");
  }

  TEST_CASE("csv parsing") {
    const CsvTable t = parse_csv("a,b,c\n1,2,3\n\n4,,6\n");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1] == std::vector<std::string>{"4", "", "6"});
    CHECK_THROWS_AS(parse_csv(""), std::invalid_argument);
  }

  TEST_CASE("csv writer flushes every row") {
    const fs::path dir = fresh_dir("writer");
    CsvWriter w(dir / "sweep.csv", kLambdaCsv.header);
    w.row(csv_fields(LambdaRow{1.0, 0.5, 1e-4, -1.2, false, true}));
    const CsvTable t = read_csv_file(dir / "sweep.csv");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0] == std::vector<std::string>{"1", "0.5", "0.0001", "-1.2", "0", "1"});
    CHECK_THROWS_AS(w.row({"1"}), std::logic_error);
  }

  TEST_CASE("atomic write leaves no temporary") {
    const fs::path dir = fresh_dir("atomic");
    write_text_atomic(dir / "a.json", "{}\n");
    write_text_atomic(dir / "a.json", "[]\n");
    CHECK(read_text(dir / "a.json") == "[]\n");
    CHECK_FALSE(fs::exists(dir / "a.json.tmp"));
  }

  TEST_CASE("row formatting matches the schema headers") {
    CHECK(csv_fields(PScalingRow{}).size() == 5);
    CHECK(csv_fields(LambdaRow{}).size() == 6);
    CHECK(csv_fields(BangLengthRow{}).size() == 4);
    CHECK(std::string(kPhiCsv.header) == kSweepCsvHeader);
  }

  TEST_CASE("schema check accepts a valid directory") {
    const fs::path dir = fresh_dir("valid");
    const GridProtocol g = GridProtocol::constant(1.0, 4, 0.5);
    write(dir / "protocol.csv", protocol_csv(g));
    write(dir / "trace.csv", trace_csv({{0, -1.0, 0.1, 1.0}}));
    write(dir / "bangs.json", to_json(BangSequence::equal(1.0, 2)).dump());
    save_instance(testing::two_spin(), dir / "run.instance.json");
    write(dir / "manifest.json", kManifest);
    CHECK(check_run_directory(dir).empty());
  }

  TEST_CASE("schema check reports problems") {
    const fs::path dir = fresh_dir("invalid");
    CHECK(check_run_directory(dir).size() == 1);

    write(dir / "protocol.csv", "t_start,t_end,u\n0,0.5,x\n");
    write(dir / "trace.csv", "iter,J\n0,1\n");
    write(dir / "bangs.json", R"({"schema": "qcontrol.bangs/1"})");
    const auto problems = check_run_directory(dir);
    auto mentions = [&](const std::string& s) {
      return std::any_of(problems.begin(), problems.end(), [&](const auto& p) { return p.find(s) != std::string::npos; });
    };
    CHECK(mentions("protocol.csv: row 1 column 'u'"));
    CHECK(mentions("trace.csv: unrecognized header"));
    CHECK(mentions("bangs.json"));
    CHECK(mentions("manifest.json is missing"));

    write(dir / "manifest.json",
          R"({"schema": "qcontrol.manifest/1", "command": "x", "argv": [], "config": {}, "outputs": ["gone.csv"]})");
    CHECK(check_run_directory(dir).size() == 4);
  }
}
