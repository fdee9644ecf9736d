#include "mimstd/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <set>
#include <sstream>

#include "mimstd/errors.hpp"
#include "mimstd/io.hpp"

namespace mimstd::config {

namespace {

namespace pt = boost::property_tree;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first != std::string::npos) out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw SchemaError("config key '" + key + "': bad number '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw SchemaError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<T>(key, item));
  if (out.empty()) throw SchemaError("config key '" + key + "' is empty");
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>) {
      s += io::format_double(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

void apply(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& value) {
  const std::string full = section + "." + key;
  auto& s = cfg.base;
  if (section == "benchmark") {
    if (key == "profile") return;
    if (key == "replicates") return void(s.n_replicates = parse_number<std::size_t>(full, value));
    if (key == "n_index") return void(cfg.n_index = parse_list<std::size_t>(full, value));
    if (key == "kappa") return void(cfg.kappas = parse_list<double>(full, value));
    if (key == "methods") {
      s.methods.clear();
      for (const auto& m : split_list(value)) {
        try {
          s.methods.push_back(harness::parse_method(m));
        } catch (const DomainError& e) {
          throw SchemaError("config key '" + full + "': " + e.what());
        }
      }
      return;
    }
    if (key == "base_seed") return void(s.base_seed = parse_number<std::uint64_t>(full, value));
    if (key == "workers") return void(s.workers = parse_number<std::size_t>(full, value));
    if (key == "level") return void(s.level = parse_number<double>(full, value));
    if (key == "truth_cohort") return void(s.truth_cohort = parse_number<std::size_t>(full, value));
    if (key == "truth_seed") return void(s.truth_seed = parse_number<std::uint64_t>(full, value));
    if (key == "max_failure_fraction") return void(s.max_failure_fraction = parse_number<double>(full, value));
  } else if (section == "mcmc") {
    if (key == "chains") return void(s.mcmc.n_chains = parse_number<std::size_t>(full, value));
    if (key == "iterations") return void(s.mcmc.iterations = parse_number<std::size_t>(full, value));
    if (key == "burn_in") return void(s.mcmc.burn_in = parse_number<std::size_t>(full, value));
    if (key == "thin") return void(s.mcmc.thin = parse_number<std::size_t>(full, value));
    if (key == "independence_probability") {
      return void(s.mcmc.independence_probability = parse_number<double>(full, value));
    }
  } else if (section == "prior") {
    if (key == "intercept_scale") return void(s.prior.intercept_scale = parse_number<double>(full, value));
    if (key == "coefficient_scale") return void(s.prior.coefficient_scale = parse_number<double>(full, value));
    if (key == "autoscale") return void(s.prior.autoscale = parse_bool(full, value));
  } else if (section == "bootstrap") {
    if (key == "resamples") return void(s.bootstrap.n_resamples = parse_number<std::size_t>(full, value));
  } else if (section == "mim") {
    if (key == "pooling") {
      if (value == "rules") return void(s.mim.pooling = mim::PoolingMethod::combining_rules);
      if (value == "simulation") return void(s.mim.pooling = mim::PoolingMethod::posterior_simulation);
      throw SchemaError("config key '" + full + "': expected 'rules' or 'simulation'");
    }
    if (key == "simulation_draws") return void(s.mim.simulation_draws = parse_number<std::size_t>(full, value));
    if (key == "clamp_negative_variance") return void(s.mim.clamp_negative_variance = parse_bool(full, value));
  } else if (section == "dgm") {
    if (key == "means") return void(s.dgm.means = parse_list<double>(full, value));
    if (key == "sds") return void(s.dgm.sds = parse_list<double>(full, value));
    if (key == "rho") return void(s.dgm.rho = parse_number<double>(full, value));
    if (key == "beta0") return void(s.dgm.beta0 = parse_number<double>(full, value));
    if (key == "beta1") return void(s.dgm.beta1 = parse_list<double>(full, value));
    if (key == "beta2") return void(s.dgm.beta2 = parse_list<double>(full, value));
    if (key == "beta_t") return void(s.dgm.beta_t = parse_number<double>(full, value));
    if (key == "n_target") return void(s.dgm.n_target = parse_number<std::size_t>(full, value));
  }
  throw SchemaError("unknown config key '" + full + "'");
}

}  // namespace

Profile parse_profile(const std::string& name) {
  if (name == "quick") return Profile::quick;
  if (name == "full") return Profile::full;
  throw SchemaError("unknown profile '" + name + "' (expected quick or full)");
}

std::string profile_name(Profile profile) { return profile == Profile::quick ? "quick" : "full"; }

RunConfig defaults(Profile profile) {
  RunConfig cfg;
  cfg.profile = profile;
  if (profile == Profile::quick) {
    cfg.base.n_replicates = 200;
    cfg.base.mcmc.iterations = 2000;
    cfg.base.mcmc.burn_in = 1000;  // M = 2 * 1000 / 4 = 500
  }
  return cfg;
}

std::vector<harness::ScenarioSpec> RunConfig::scenarios() const {
  std::vector<harness::ScenarioSpec> out;
  for (double kappa : kappas) {
    for (std::size_t n : n_index) {
      harness::ScenarioSpec s = base;
      s.kappa = kappa;
      s.n_index = n;
      s.dgm.n_index = n;
      out.push_back(s);
    }
  }
  return out;
}

std::string RunConfig::canonical() const {
  const auto& s = base;
  std::ostringstream os;
  os << "profile=" << profile_name(profile) << "\n"
     << "n_index=" << join(n_index) << "\n"
     << "kappa=" << join(kappas) << "\n"
     << "replicates=" << s.n_replicates << "\n"
     << "methods=";
  for (std::size_t i = 0; i < s.methods.size(); ++i) os << (i ? "," : "") << harness::method_name(s.methods[i]);
  os << "\nbase_seed=" << s.base_seed << "\nlevel=" << io::format_double(s.level)
     << "\ntruth_cohort=" << s.truth_cohort << "\ntruth_seed=" << s.truth_seed
     << "\nmax_failure_fraction=" << io::format_double(s.max_failure_fraction)
     << "\nmcmc=" << s.mcmc.n_chains << "," << s.mcmc.iterations << "," << s.mcmc.burn_in << "," << s.mcmc.thin
     << "," << io::format_double(s.mcmc.independence_probability)
     << "\nprior=" << io::format_double(s.prior.intercept_scale) << ","
     << io::format_double(s.prior.coefficient_scale) << "," << s.prior.autoscale
     << "\nbootstrap=" << s.bootstrap.n_resamples << "\nmim=" << mim::pooling_name(s.mim.pooling) << ","
     << s.mim.simulation_draws << "," << s.mim.clamp_negative_variance << "\ndgm=" << join(s.dgm.means) << ";"
     << join(s.dgm.sds) << ";" << io::format_double(s.dgm.rho) << ";" << io::format_double(s.dgm.beta0) << ";"
     << join(s.dgm.beta1) << ";" << join(s.dgm.beta2) << ";" << io::format_double(s.dgm.beta_t) << ";"
     << s.dgm.n_target << "\n";
  return os.str();
}

RunConfig parse_config(const std::string& ini_text, const std::string& profile_override) {
  pt::ptree tree;
  try {
    std::istringstream is(ini_text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  std::string profile = profile_override;
  if (profile.empty()) profile = tree.get<std::string>("benchmark.profile", "full");
  RunConfig cfg = defaults(parse_profile(profile));
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw SchemaError("config key '" + section + "' is outside a section");
    for (const auto& [key, value] : body) apply(cfg, section, key, value.get_value<std::string>());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::string& profile_override) {
  return parse_config(io::read_file(path), profile_override);
}

}  // namespace mimstd::config
