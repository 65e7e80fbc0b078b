#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <vat/io.hpp>
#include <vat/models.hpp>

using namespace vat;

TEST_CASE("config parser: sections, comments, lookups", "[io]") {
  Config cfg = parse_config_text(
      "# comment\n"
      "[scan]\n"
      "T_grid = 2, 4, 8\n"
      "dt = 0.005   # trailing comment\n"
      "\n"
      "[output]\n"
      "name = run_a\n");
  REQUIRE(cfg.get("scan.dt", "") == "0.005");
  REQUIRE(cfg.get_double("scan.dt", 0.0) == Catch::Approx(0.005));
  REQUIRE(cfg.get("output.name", "") == "run_a");
  REQUIRE(cfg.get("missing.key", "fallback") == "fallback");
  auto grid = cfg.get_list("scan.T_grid", "");
  REQUIRE(grid == std::vector<double>{2.0, 4.0, 8.0});
}

TEST_CASE("config parser reports the offending line", "[io]") {
  try {
    parse_config_text("[a]\nkey value without equals\n");
    FAIL("expected a parse error");
  } catch (const std::exception& e) {
    std::string msg = e.what();
    REQUIRE(msg.find("line 2") != std::string::npos);
  }
  REQUIRE_THROWS(parse_config_text("[scan]\ndt = abc\n").get_double("scan.dt", 0.0));
}

TEST_CASE("config hash is stable and content sensitive", "[io]") {
  Config a = parse_config_text("[x]\nk = 1\n");
  Config b = parse_config_text("[x]\nk = 1\n");
  Config c = parse_config_text("[x]\nk = 2\n");
  REQUIRE(a.hash_hex == b.hash_hex);
  REQUIRE(a.hash_hex != c.hash_hex);
  REQUIRE(a.hash_hex.size() == 16);
}

TEST_CASE("csv cells carry 17 significant digits and a dot decimal", "[io]") {
  REQUIRE(csv_cell(0.1) == "0.10000000000000001");
  REQUIRE(csv_cell(1.0 / 3.0) == "0.33333333333333331");
  REQUIRE(csv_cell(2.0) == "2");
  double third = 1.0 / 3.0;
  REQUIRE(std::stod(csv_cell(third)) == third);  // round-trip exactness
}

TEST_CASE("csv writer layout: comment line, header, LF endings", "[io]") {
  auto path = std::filesystem::temp_directory_path() / "vat_test_out.csv";
  {
    CsvWriter w(path, {"s", "value"}, "deadbeef00000000", 0.25);
    w.row({0.0, 1.5});
    w.row({0.5, -2.0 / 3.0});
  }
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  std::filesystem::remove(path);
  REQUIRE(text.find('\r') == std::string::npos);
  std::istringstream lines(text);
  std::string l1, l2, l3, l4;
  std::getline(lines, l1);
  std::getline(lines, l2);
  std::getline(lines, l3);
  std::getline(lines, l4);
  REQUIRE(l1 == "# config=deadbeef00000000 dt=0.25 version=1.0.0");
  REQUIRE(l2 == "s,value");
  REQUIRE(l3 == "0,1.5");
  REQUIRE(l4 == "0.5,-0.66666666666666663");
}

TEST_CASE("csv writer rejects ragged rows", "[io]") {
  auto path = std::filesystem::temp_directory_path() / "vat_test_ragged.csv";
  CsvWriter w(path, {"a", "b"}, "0", 0.1);
  REQUIRE_THROWS(w.row({1.0}));
  std::filesystem::remove(path);
}

TEST_CASE("instance files survive a disk round-trip", "[io]") {
  auto inst = sample_spin_glass(8, 20260826);
  auto path = std::filesystem::temp_directory_path() / "vat_test_instance.txt";
  save_instance(inst, path.string());

  // First line is "N seed"; exactly N(N-1)/2 + N data lines follow.
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  REQUIRE(first == "8 20260826");
  int rest = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rest;
  REQUIRE(rest == 28 + 8);

  auto back = load_instance(path.string());
  std::filesystem::remove(path);
  REQUIRE(back.N == inst.N);
  REQUIRE(back.seed == inst.seed);
  REQUIRE((back.J - inst.J).norm() == 0.0);
  REQUIRE((back.h - inst.h).norm() == 0.0);
}
