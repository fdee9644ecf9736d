#include <doctest.h>

#include <filesystem>
#include <limits>
#include <string>

#include "mimstd/config.hpp"
#include "mimstd/errors.hpp"
#include "mimstd/io.hpp"
#include "mimstd/simgen.hpp"

using namespace mimstd;

namespace {

std::string schema_message(const auto& fn) {
  try {
    fn();
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("numbers round-trip exactly") {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 123456789.123456789, std::numeric_limits<double>::denorm_min(),
                   std::numeric_limits<double>::max(), 0.0, -2.5}) {
    const std::string s = io::format_double(v);
    CHECK(io::parse_target_csv("x1\n" + s + "\n").covariates(0, 0) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(-2.0) == "-2");
}

TEST_CASE("index and target csv round-trip") {
  const auto cfg = simgen::DgmConfig::standard(200);
  const auto d = simgen::simulate_index_trial(cfg, 3);
  const std::string text = io::index_csv(d);
  CHECK(text.rfind("x1,x2,t,y\n", 0) == 0);
  const auto back = io::parse_index_csv(text);
  CHECK(back.covariates == d.covariates);
  CHECK(back.treatment == d.treatment);
  CHECK(back.outcome == d.outcome);
  CHECK(io::index_csv(back) == text);

  const auto t = simgen::simulate_target(cfg, 0.5, 3, 50);
  const std::string ttext = io::target_csv(t);
  CHECK(ttext.rfind("x1,x2\n", 0) == 0);
  CHECK(io::parse_target_csv(ttext).covariates == t.covariates);

  // an index file serves as a target; the arm columns are dropped
  CHECK(io::parse_target_csv(text).covariates == d.covariates);
}

TEST_CASE("csv parsing tolerates CRLF, spaces and a missing final newline") {
  const auto d = io::parse_index_csv("x1,t,y\r\n 0.5 ,1,0\r\n-1,0,1");
  REQUIRE(d.size() == 2);
  CHECK(d.covariates(0, 0) == 0.5);
  CHECK(d.outcome[1] == 1.0);
  const auto none = io::parse_index_csv("t,y\n1,1\n0,0\n");
  CHECK(none.covariates.cols() == 0);
  CHECK(none.size() == 2);
}

TEST_CASE("csv schema errors name the line and column") {
  CHECK(schema_message([] { io::parse_index_csv("x1,t,y\n0.5,1,abc\n", "a.csv"); }).find("a.csv:2:3") == 0);
  CHECK(schema_message([] { io::parse_index_csv("x1,t,y\n0.5,1\n", "a.csv"); }).find("a.csv:2") == 0);
  CHECK(schema_message([] { io::parse_index_csv("x1,t,y\n0.5,2,1\n", "a.csv"); }).find("a.csv:2:2") == 0);
  CHECK(schema_message([] { io::parse_index_csv("x1,x3,t,y\n", "a.csv"); }).find("a.csv:1:2") == 0);
  CHECK(schema_message([] { io::parse_index_csv("x1,y,t\n", "a.csv"); }).find("a.csv:1") == 0);
  CHECK(schema_message([] { io::parse_index_csv("", "a.csv"); }).find("a.csv:1") == 0);
  CHECK(schema_message([] { io::parse_target_csv("x1,x2\n1,1e999\n", "b.csv"); }).find("b.csv:2:2") == 0);
  CHECK(schema_message([] { io::parse_target_csv("a\n1\n", "b.csv"); }).find("b.csv:1:1") == 0);
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "mimstd_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.txt";
  io::write_file_atomic(path, "hello\n");
  CHECK(io::read_file(path) == "hello\n");
  io::write_file_atomic(path, "again\n");
  CHECK(io::read_file(path) == "again\n");
  CHECK_FALSE(std::filesystem::exists(dir / "out.txt.tmp"));
  CHECK_THROWS_AS(io::read_file(dir / "missing.txt"), IoError);
  CHECK_THROWS_AS(io::write_file_atomic(dir / "no" / "such" / "dir.txt", "x"), IoError);
  std::filesystem::remove_all(dir);

  CHECK(io::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(io::hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("profiles") {
  const auto full = config::defaults(config::Profile::full);
  CHECK(full.base.n_replicates == 1000);
  CHECK(full.scenarios().size() == 6);
  const auto quick = config::defaults(config::Profile::quick);
  CHECK(quick.base.n_replicates == 200);
  CHECK(quick.base.mcmc.iterations == 2000);
  CHECK(config::parse_profile("quick") == config::Profile::quick);
  CHECK_THROWS_AS(config::parse_profile("fast"), SchemaError);
  CHECK(config::profile_name(config::Profile::full) == "full");

  const auto specs = full.scenarios();
  CHECK(specs[0].id() == "N500_k0.5");
  CHECK(specs[2].id() == "N2000_k0.5");
  CHECK(specs[5].id() == "N2000_k1");
  CHECK(specs[4].dgm.n_index == 1000);
}

TEST_CASE("config files override profile defaults") {
  const auto cfg = config::parse_config(
      "[benchmark]\nprofile = quick\nreplicates = 20\nn_index = 300, 600\nkappa = 1\nmethods = gcomp\n"
      "workers = 3\n[mcmc]\nchains = 3\nthin = 2\n[prior]\nautoscale = false\n[bootstrap]\nresamples = 250\n"
      "[mim]\npooling = simulation\nclamp_negative_variance = yes\n[dgm]\nbeta_t = -2\nmeans = 0.5, 0.25\n");
  CHECK(cfg.profile == config::Profile::quick);
  CHECK(cfg.base.n_replicates == 20);
  CHECK(cfg.n_index == std::vector<std::size_t>{300, 600});
  CHECK(cfg.kappas == std::vector<double>{1.0});
  REQUIRE(cfg.base.methods.size() == 1);
  CHECK(cfg.base.methods[0] == harness::Method::gcomp);
  CHECK(cfg.base.workers == 3);
  CHECK(cfg.base.mcmc.n_chains == 3);
  CHECK(cfg.base.mcmc.thin == 2);
  CHECK(cfg.base.mcmc.iterations == 2000);
  CHECK_FALSE(cfg.base.prior.autoscale);
  CHECK(cfg.base.bootstrap.n_resamples == 250);
  CHECK(cfg.base.mim.pooling == mim::PoolingMethod::posterior_simulation);
  CHECK(cfg.base.mim.clamp_negative_variance);
  CHECK(cfg.base.dgm.beta_t == -2.0);
  CHECK(cfg.base.dgm.means == std::vector<double>{0.5, 0.25});
  CHECK(cfg.scenarios().size() == 2);

  CHECK(config::parse_config("[benchmark]\nprofile = quick\n", "full").profile == config::Profile::full);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(config::parse_config("[benchmark]\nreplicate = 3\n"), SchemaError);
  CHECK_THROWS_AS(config::parse_config("[mcmc]\nchains = two\n"), SchemaError);
  CHECK_THROWS_AS(config::parse_config("[mcmc]\nchains = -1\n"), SchemaError);
  CHECK_THROWS_AS(config::parse_config("[benchmark]\nmethods = maic\n"), SchemaError);
  CHECK_THROWS_AS(config::parse_config("[mim]\npooling = average\n"), SchemaError);
  CHECK_THROWS_AS(config::parse_config("[prior]\nautoscale = maybe\n"), SchemaError);
  CHECK_THROWS_AS(config::parse_config("[benchmark]\nkappa = \n"), SchemaError);
  CHECK_THROWS_AS(config::parse_config("[extra]\nkey = 1\n"), SchemaError);
  CHECK_THROWS_AS(config::parse_config("replicates = 3\n"), SchemaError);
  CHECK_THROWS_AS(config::parse_config("[benchmark\n"), SchemaError);
  CHECK_THROWS_AS(config::load_config("/nonexistent/mimstd.ini"), IoError);
  CHECK(schema_message([] { config::parse_config("[mcmc]\nchain = 2\n"); }).find("mcmc.chain") !=
        std::string::npos);
}

TEST_CASE("canonical rendering tracks every setting") {
  const auto a = config::defaults(config::Profile::full);
  CHECK(a.canonical() == config::defaults(config::Profile::full).canonical());
  CHECK(a.canonical() != config::defaults(config::Profile::quick).canonical());
  auto b = a;
  b.base.dgm.rho = 0.2;
  CHECK(a.canonical() != b.canonical());
  b = a;
  b.base.mcmc.thin = 5;
  CHECK(a.canonical() != b.canonical());
  b = a;
  b.base.workers = 8;  // execution detail, not part of the results
  CHECK(a.canonical() == b.canonical());
  // parsed defaults render identically to built-in defaults
  CHECK(config::parse_config("[benchmark]\nprofile = full\n").canonical() == a.canonical());
}
