#include <cmath>
#include <limits>

#include "exo/errors.hpp"
#include "exo/io.hpp"
#include "support.hpp"

using namespace exo;
using exo::testing::TempDir;

TEST(Io, FormatsNineSignificantDigits) {
  EXPECT_EQ(io::format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(io::format_number(5000.0 / 101.0), "49.5049505");
  EXPECT_EQ(io::format_number(-0.0), "0");
  EXPECT_EQ(io::format_number(70), "70");
  EXPECT_EQ(io::format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(io::format_optional(std::nullopt), "NA");
}

TEST(Io, ParsesNumbersStrictly) {
  EXPECT_DOUBLE_EQ(io::parse_double(" 1.5e2 ", "t"), 150);
  EXPECT_THROW(io::parse_double("1.5x", "t"), FormatError);
  EXPECT_THROW(io::parse_double("", "t"), FormatError);
  EXPECT_FALSE(io::parse_optional("NA", "t").has_value());
  EXPECT_TRUE(std::isnan(io::parse_double("nan", "t")));
}

TEST(Io, CsvRoundTripAndErrors) {
  TempDir dir;
  io::CsvTable t{{"a", "b"}, {{"1", "2"}, {"3", "4"}}};
  io::write_csv(dir / "t.csv", t);
  const auto back = io::read_csv(dir / "t.csv");
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("b"), 1u);
  try {
    back.column("knee_moment");
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("knee_moment"), std::string::npos);
  }

  exo::testing::spit(dir / "bad.csv", "a,b\n1,2,3\n");
  EXPECT_THROW(io::read_csv(dir / "bad.csv"), FormatError);
  exo::testing::spit(dir / "empty.csv", "");
  EXPECT_THROW(io::read_csv(dir / "empty.csv"), SchemaError);
}

TEST(Io, KeyValuesSkipCommentsAndRejectGarbage) {
  const auto kv = io::parse_key_values("# comment\nb = 2\n\na=x y # trailing\n", "mem");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("a"), "x y");
  EXPECT_EQ(kv.at("b"), "2");
  EXPECT_THROW(io::parse_key_values("no equals sign\n", "mem"), ConfigError);
  EXPECT_THROW(io::parse_key_values("=3\n", "mem"), ConfigError);
  EXPECT_THROW(io::read_key_values("/nonexistent/file.cfg"), ConfigError);
}

TEST(Io, ErrorKindsMapToExitCodes) {
  EXPECT_EQ(NumericError("x").exit_code(), 1);
  EXPECT_EQ(ConfigError("x").exit_code(), 2);
  EXPECT_EQ(SchemaError("x").exit_code(), 2);
  EXPECT_STREQ(DataError("x").kind_name(), "data");
}
