#include <gtest/gtest.h>

#include <cstdlib>

#include "csl/io.hpp"

using namespace csl;
using namespace csl::io;

TEST(Format, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) EXPECT_EQ(std::strtod(fmt(v).c_str(), nullptr), v);
  EXPECT_EQ(fmt(0.5), "0.5");
}

TEST(Csv, WriteParseRoundTrip) {
  CsvWriter w(Json{{"seed", 7}, {"note", "a b"}}, {"time", "value"});
  w.row({0.0, 1.0 / 3.0});
  w.row({0.25, -1e-20});
  w.raw_row({"0.5", "left"});
  EXPECT_THROW(w.row({1.0}), Error);
  const std::string text = w.str();
  EXPECT_EQ(text.rfind("# seed: 7\n# note: \"a b\"\ntime,value\n", 0), 0u);
  const CsvTable t = parse_csv(text);
  ASSERT_EQ(t.meta_lines.size(), 2u);
  EXPECT_EQ(t.header, (std::vector<std::string>{"time", "value"}));
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(std::strtod(t.rows[0][1].c_str(), nullptr), 1.0 / 3.0);
  EXPECT_EQ(t.rows[2][1], "left");
  EXPECT_EQ(split_csv_line("a,,b,"), (std::vector<std::string>{"a", "", "b", ""}));
}

TEST(DensityBinary, ExactRoundTrip) {
  const Grid1D g = Grid1D::centered(16, 0.3);
  const DensityMatrix rho = DensityMatrix::pure(gaussian_packet(g, 0.2, 0.9, 1.1));
  const std::string bytes = density_binary(rho);
  EXPECT_EQ(bytes.size(), 8u + 8u + 16u + 16u * 16u * 16u);
  EXPECT_EQ(bytes.substr(0, 8), "CSLRHO01");
  const DensityMatrix back = read_density_binary(bytes);
  EXPECT_EQ(back.elements(), rho.elements());
  EXPECT_EQ(back.grid().dx(), g.dx());
  EXPECT_EQ(back.grid().x_min(), g.x_min());
  EXPECT_THROW(read_density_binary(bytes.substr(0, bytes.size() - 1)), Error);
  EXPECT_THROW(read_density_binary("NOTRHO00"), Error);
}

TEST(DensityCsv, OneRowPerElement) {
  const Grid1D g = Grid1D::centered(8, 0.5);
  const DensityMatrix rho = DensityMatrix::pure(position_eigenstate(g, 1));
  const CsvTable t = parse_csv(density_csv(rho, Json::object()));
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b", "re", "im"}));
  ASSERT_EQ(t.rows.size(), 64u);
  EXPECT_NEAR(std::strtod(t.rows[9][2].c_str(), nullptr), 2.0, 1e-14);  // (1,1) = 1/dx
}

TEST(SystemJson, ExactRoundTrip) {
  NormalStream rng(3, 0);
  td::System sys{{"a", td::random_hermitian(3, rng), td::random_matrix(3, rng)},
                 {"b", td::random_hermitian(3, rng), td::random_hermitian(3, rng)}};
  const Json j = Json::parse(json_text(system_json(sys)));
  const td::System back = system_from_json(j);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_EQ(back[r].label, sys[r].label);
    EXPECT_EQ(back[r].q, sys[r].q);
    EXPECT_EQ(back[r].p, sys[r].p);
  }
  EXPECT_THROW(system_from_json(Json::object()), Error);
}

TEST(BoundRecords, JsonRoundTripAndDerivedLambda) {
  const auto builtin = builtin_bounds();
  Json arr = Json::array();
  for (const auto& r : builtin) arr.push_back(bound_record_json(r));
  const auto back = bound_records_from_json(arr);
  ASSERT_EQ(back.size(), builtin.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].name, builtin[i].name);
    EXPECT_EQ(back[i].kind, builtin[i].kind);
    EXPECT_EQ(back[i].lambda_max, builtin[i].lambda_max);
  }
  // lambda_max derived from the physical inputs when absent
  Json derived = Json::array({Json{{"name", "x"},
                                   {"kind", "interferometry"},
                                   {"mass", 1e9 * si::kAtomicMassUnit},
                                   {"flight_time", 0.1},
                                   {"r_C_assumed", 1e-7}}});
  EXPECT_NEAR(bound_records_from_json(derived)[0].lambda_max / 1e-17, 1.0, 1e-12);
  derived[0]["kind"] = "bogus";
  try {
    bound_records_from_json(derived);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    EXPECT_NE(std::string(e.what()).find("bounds[0]"), std::string::npos);
  }
}

TEST(TrajectoryCsv, ColumnsAndMetadata) {
  TrajectoryRecord rec;
  rec.times = {0.0, 0.5};
  rec.columns = {"norm", "position_mean"};
  rec.series = {{1.0, 1.0}, {0.25, -0.125}};
  const CsvTable t = parse_csv(trajectory_csv(rec, Json{{"seed", 1}}));
  EXPECT_EQ(t.header, (std::vector<std::string>{"time", "norm", "position_mean"}));
  EXPECT_EQ(t.rows[1][2], "-0.125");
  EXPECT_EQ(t.meta_lines.front(), "seed: 1");
}
