#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "stablesde/config.hpp"
#include "stablesde/errors.hpp"
#include "stablesde/io.hpp"

using namespace stablesde;
namespace fs = std::filesystem;

namespace {

const char* kSimulated = R"toml(# simulated example
seed = 42
beta = 1.5
output = "out"

[model]
drift = "alpha1*(x-alpha2)"
scale = "exp(gamma*cos(x))"
alpha = ["alpha1", "alpha2"]
gamma = ["gamma"]
lower = [-10, -10, -5]
upper = [10, 10, 5]

[data.simulate]
N = 500
T = 1
theta = [-3, 1, 0.5]

[prior]
kind = ["uniform", "uniform", "normal"]
mean = [0, 0, 0.5]
sd = [1, 1, 2]

[mcmc]
iterations = 2000
variant = "cpm"
rho = 0.95
sigma_diag = [1, 2, 3]
burn = 200
thin = 2
)toml";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "stablesde_unit";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Toml, ParsesTheSubset) {
  const auto t = parse_toml("a = 1\nb = \"x\\\"y\" # c\n[s.t]\nc = [1, 2,\n 3]\nd = true\ne = -2.5e-1\n");
  EXPECT_EQ(t.at("a").number, 1.0);
  EXPECT_EQ(t.at("b").text, "x\"y");
  EXPECT_EQ(t.at("s.t.c").items.size(), 3u);
  EXPECT_TRUE(t.at("s.t.d").boolean);
  EXPECT_EQ(t.at("s.t.e").number, -0.25);
  EXPECT_THROW(parse_toml("a = \n"), ConfigError);
  EXPECT_THROW(parse_toml("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(parse_toml("[x\n"), ConfigError);
}

TEST(Config, ParsesTheSimulatedSetup) {
  const auto c = parse_config(kSimulated);
  EXPECT_EQ(c.seed, 42u);
  ASSERT_TRUE(c.beta.has_value());
  EXPECT_EQ(*c.beta, 1.5);
  ASSERT_TRUE(c.data.simulate.has_value());
  EXPECT_EQ(c.data.simulate->N, 500u);
  EXPECT_FALSE(c.data.path.has_value());
  const auto m = c.make_model();
  EXPECT_EQ(m.dim(), 3u);
  const auto mc = c.make_mcmc(3);
  EXPECT_EQ(mc.variant, Variant::cpm);
  EXPECT_EQ(mc.rho, 0.95);
  EXPECT_EQ(mc.sigma(2, 2), 3.0);
  EXPECT_EQ(mc.seed, 42u);
  const auto p = c.make_prior();
  EXPECT_EQ(p.terms()[2].kind, PriorTerm::Kind::normal);
  EXPECT_EQ(p.terms()[2].sd, 2.0);
}

TEST(Config, RoundTripIsIdempotent) {
  const auto c = parse_config(kSimulated);
  const std::string once = serialize_config(c);
  const std::string twice = serialize_config(parse_config(once));
  EXPECT_EQ(once, twice);
  const auto back = parse_config(once);
  EXPECT_EQ(back.model.drift, c.model.drift);
  EXPECT_EQ(back.mcmc.sigma_diag, c.mcmc.sigma_diag);
  EXPECT_EQ(back.prior.kind, c.prior.kind);

  std::string est = kSimulated;
  est.replace(est.find("beta = 1.5"), 10, "beta = \"estimate\"");
  const auto e = parse_config(est);
  EXPECT_FALSE(e.beta.has_value());
  EXPECT_EQ(serialize_config(parse_config(serialize_config(e))), serialize_config(e));
}

TEST(Config, ListsEveryViolation) {
  std::string bad = kSimulated;
  bad.replace(bad.find("iterations = 2000"), 17, "iterations = 1");
  bad.replace(bad.find("rho = 0.95"), 10, "rho = 3");
  bad += "bogus = 1\n";
  try {
    parse_config(bad);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("iterations"), std::string::npos) << what;
    EXPECT_NE(what.find("rho"), std::string::npos) << what;
    EXPECT_NE(what.find("bogus"), std::string::npos) << what;
  }
}

TEST(Config, DataSourceMustBeExactlyOne) {
  std::string none = kSimulated;
  none.erase(none.find("[data.simulate]"), none.find("[prior]") - none.find("[data.simulate]"));
  EXPECT_THROW(parse_config(none), ConfigError);
  std::string both = kSimulated;
  both.replace(both.find("[data.simulate]"), 15, "[data]\npath = \"x.csv\"\n[data.simulate]");
  EXPECT_THROW(parse_config(both), ConfigError);
}

TEST(Config, UndeclaredParameterInModel) {
  std::string bad = kSimulated;
  bad.replace(bad.find("exp(gamma*cos(x))"), 17, "exp(delta*cos(x))");
  try {
    parse_config(bad);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'delta'"), std::string::npos) << e.what();
  }
}

TEST(LoadCsv, DropsMissingRows) {
  const auto p = scratch("na.csv");
  write_file(p, "1.0\nNA\n2.0\n");
  const auto s = load_csv(p.string(), "", 2.0);
  EXPECT_EQ(s.obs.values, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(s.obs.N, 1u);
  EXPECT_EQ(s.obs.h, 2.0);
  EXPECT_EQ(s.dropped_rows, (std::vector<std::size_t>{2}));
}

TEST(LoadCsv, SelectsTheNamedColumn) {
  const auto p = scratch("price.csv");
  write_file(p, "t,price\n0,10.5\n1,\n2,11.25\n3,12\n");
  const auto s = load_csv(p.string(), "price", 3.0);
  EXPECT_EQ(s.obs.values, (std::vector<double>{10.5, 11.25, 12}));
  EXPECT_EQ(s.dropped_rows, (std::vector<std::size_t>{2}));
  EXPECT_THROW(load_csv(p.string(), "volume", 3.0), IoError);
}

TEST(LoadCsv, Errors) {
  const auto na = scratch("all_na.csv");
  write_file(na, "NA\nNA\n\n");
  EXPECT_THROW(load_csv(na.string(), "", 1.0), IoError);
  const auto bad = scratch("bad.csv");
  write_file(bad, "v\n1\nabc\n3\n");
  try {
    load_csv(bad.string(), "v", 1.0);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_csv(scratch("missing.csv").string() + ".nope", "", 1.0), IoError);
}

TEST(Trace, RoundTripsExactly) {
  ChainTrace t;
  t.names = {"alpha1", "alpha2", "gamma"};
  t.thetas = Eigen::MatrixXd(2, 3);
  t.thetas << -3.0000000000000004, 1.0 / 3.0, 0.1, 1e-300, -2.5e17, 0.30000000000000004;
  t.accept_flags = {true};
  const auto p = scratch("trace.csv");
  write_trace(t, p.string());
  const std::string text = read_text(p.string());
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_EQ(text.substr(0, text.find('\n')), "iter,alpha1,alpha2,gamma,accepted");
  const auto back = read_trace(p.string());
  EXPECT_EQ(back.names, t.names);
  EXPECT_EQ(back.thetas, t.thetas);
  EXPECT_EQ(back.accepted, (std::vector<bool>{false, true}));
}

TEST(Trace, UnwritablePathIsAnIoError) {
  ChainTrace t;
  t.names = {"a"};
  t.thetas = Eigen::MatrixXd::Zero(2, 1);
  t.accept_flags = {false};
  EXPECT_THROW(write_trace(t, "/nonexistent_dir_for_tests/trace.csv"), IoError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 1e22, 123456789.125}) EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Observations, WriteThenLoad) {
  const auto obs = ObservationSet::from_values({0.5, -1.25, 3.0, 1e-17}, 3.0);
  const auto p = scratch("obs.csv");
  write_observations(obs, p.string());
  const auto back = load_csv(p.string(), "value", 3.0);
  EXPECT_EQ(back.obs.values, obs.values);
  EXPECT_TRUE(back.dropped_rows.empty());
}
