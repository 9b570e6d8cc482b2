// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fixtures.hpp"
#include "srr/core_model.hpp"
#include "srr/dataset.hpp"
#include "srr/errors.hpp"
#include "srr/io.hpp"

using namespace srr;
using srr::testing::TempDir;

TEST_CASE("hardware signature is sorted, unique and lowercase") {
  HardwareSignature sig({"Reset", "debug", "DEBUG", "key"});
  CHECK(sig.keywords() == std::vector<std::string>{"debug", "key", "reset"});
  CHECK(sig.contains("key"));
  CHECK_FALSE(sig.contains("Key"));
  CHECK(sig.joined() == "debug key reset");
  CHECK(HardwareSignature{}.empty());
}

TEST_CASE("CWE ids") {
  CHECK(is_cwe_id("CWE-1191"));
  CHECK_FALSE(is_cwe_id("CWE-"));
  CHECK_FALSE(is_cwe_id("cwe-12"));
  CHECK_FALSE(is_cwe_id("CWE-12a"));
  CHECK(cwe_number("CWE-0042") == 42);
  CHECK_THROWS_AS(cwe_number("CWE-x"), ValidationError);
  CHECK_THROWS_AS(cwe_number("CWE-999999999999999999999999"), ValidationError);
}

TEST_CASE("make_design rejects empty inputs") {
  CHECK_THROWS_AS(make_design("", "module m; endmodule"), PreconditionError);
  CHECK_THROWS_AS(make_design("d", ""), PreconditionError);
  auto d = make_design("d", "module m; endmodule");
  CHECK_FALSE(d.summary.has_value());
  CHECK_FALSE(d.signature.has_value());
}

TEST_CASE("sha256 matches a published test vector") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("sample dataset loads sorted with optional fixed design") {
  auto cases = load_dataset(srr::testing::sample_dir() / "bench");
  REQUIRE(cases.size() == 3);
  CHECK(cases[0].case_id == "debug_unlock");
  CHECK(cases[1].case_id == "lock_bit_write");
  CHECK(cases[1].fixed_design.has_value());
  CHECK_FALSE(cases[0].fixed_design.has_value());
  CHECK(cases[2].gold_cwe_id == "CWE-1271");
  CHECK(cases[0].buggy_design.design_id == "debug_unlock");
}

TEST_CASE("dataset round trip and validation errors") {
  TempDir dir;
  BenchmarkCase c{"case_a", make_design("case_a", "module a; endmodule\n"), "assign x = 1;\n", std::nullopt,
                  "CWE-1234", "demo"};
  save_case(c, dir.path());
  auto loaded = load_dataset(dir.path());
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0] == c);

  SUBCASE("missing gold snippet names the case") {
    std::filesystem::remove(dir / "case_a" / "gold_snippet.v");
    try {
      load_dataset(dir.path());
      FAIL("expected MissingFileError");
    } catch (const MissingFileError& e) {
      CHECK(std::string(e.what()).find("case_a") != std::string::npos);
    }
  }
  SUBCASE("bad gold CWE id") {
    write_file_atomic(dir / "case_a" / "meta.json", R"({"case_id": "case_a", "gold_cwe_id": "1234"})");
    CHECK_THROWS_AS(load_dataset(dir.path()), SchemaError);
  }
  SUBCASE("case id must match directory") {
    write_file_atomic(dir / "case_a" / "meta.json", R"({"case_id": "other", "gold_cwe_id": "CWE-1"})");
    CHECK_THROWS_AS(load_dataset(dir.path()), SchemaError);
  }
  SUBCASE("missing root") { CHECK_THROWS_AS(load_dataset(dir / "nope"), MissingFileError); }
}
