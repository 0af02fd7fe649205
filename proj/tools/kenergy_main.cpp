// Command-line driver for the k-energy toolkit.
//
//   kenergy verify  --suite <name>... [--manifold M] [--k K] [--tol SCALE]
//                   [--config FILE] [--out report.json] [--threads N]
//   kenergy compute --quantity Q --manifold M [--k K] [--resolution RxA]
//                   [--potential SPEC] [--field SPEC] [--config FILE]
//                   [--out result.json] [--threads N]
//   kenergy descend --manifold M [--k K] [--resolution RxA] [--steps N]
//                   [--initial c1,c2,...] [--tol T] [--config FILE]
//                   [--out trajectory.csv] [--threads N]
//
// Configuration files are flat `key = value` text; command-line flags
// override file entries. Verify exits 0 iff every check passed.

#include <cstdio>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "kenergy/checks.hpp"

namespace {

kenergy::RunConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw kenergy::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return kenergy::RunConfig::parse(ss.str());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw kenergy::ConfigError("cannot write output file '" + path + "'");
  out << content;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    const std::string item = kenergy::RunConfig::trim(s.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(item);
    pos = comma + 1;
    if (pos > s.size()) break;
  }
  return out;
}

int cmd_verify(const kenergy::RunConfig& cfg) {
  using namespace kenergy;
  Report rep;
  rep.command = "verify";
  rep.config = cfg;
  rep.tolerance_scale = cfg.get_double("tol", 1.0);
  if (rep.tolerance_scale <= 0.0) throw ConfigError("verify: tol must be a positive scale");

  checks::SuiteFilter filter;
  if (cfg.has("manifold")) filter.manifold = manifold_from_string(cfg.get("manifold"));
  if (cfg.has("k")) filter.k = cfg.get_int("k", 1);

  checks::run_suites(rep, split_list(cfg.get("suite")), filter, cfg.get_int("threads", 1));

  std::fputs(rep.table().c_str(), stdout);
  const std::string out = cfg.get("out");
  if (!out.empty()) {
    write_file(out, rep.to_json().dump(2) + "\n");
    std::printf("report written to %s\n", out.c_str());
  }
  return rep.all_pass() ? 0 : 2;
}

int cmd_compute(const kenergy::RunConfig& cfg) {
  using namespace kenergy;
  const checks::ComputeResult res = checks::run_compute(cfg, cfg.get_int("threads", 1));
  std::printf("%s (k=%d) on %s\n", res.quantity.c_str(), res.k, res.manifold.c_str());
  std::printf("  %-12s  %s\n", "grid", "value");
  for (const auto& row : res.table) {
    if (row.value_im != 0.0)
      std::printf("  %-12s  %.17g %+.17gi\n", row.resolution.c_str(), row.value, row.value_im);
    else
      std::printf("  %-12s  %.17g\n", row.resolution.c_str(), row.value);
  }
  if (res.value_im != 0.0)
    std::printf("value = %.17g %+.17gi\n", res.value, res.value_im);
  else
    std::printf("value = %.17g\n", res.value);

  const std::string out = cfg.get("out");
  if (!out.empty()) {
    nlohmann::ordered_json j;
    j["tool"] = "kenergy";
    j["command"] = "compute";
    nlohmann::ordered_json jc = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cfg.entries) jc[k] = v;
    j["config"] = std::move(jc);
    j["quantity"] = res.quantity;
    j["manifold"] = res.manifold;
    j["k"] = res.k;
    j["table"] = nlohmann::ordered_json::array();
    for (const auto& row : res.table)
      j["table"].push_back({{"resolution", row.resolution},
                            {"value", row.value},
                            {"value_im", row.value_im}});
    j["value"] = res.value;
    j["value_im"] = res.value_im;
    write_file(out, j.dump(2) + "\n");
    std::printf("result written to %s\n", out.c_str());
  }
  return 0;
}

int cmd_descend(const kenergy::RunConfig& cfg) {
  using namespace kenergy;
  const checks::DescendRun run = checks::run_descend(cfg, cfg.get_int("threads", 1));
  const auto& traj = run.result.trajectory;
  std::printf("descend (k=%d) on %s: %s after %zu steps", run.k, run.grid.c_str(),
              run.result.message.c_str(), traj.empty() ? 0 : traj.size() - 1);
  if (!traj.empty())
    std::printf(", energy %.12g, residual %.3e", traj.back().energy, traj.back().residual);
  std::printf("\n%s\n", run.result.converged ? "converged" : "not converged");

  const std::string out = cfg.get("out");
  if (!out.empty()) {
    write_file(out, run.csv);
    std::printf("trajectory written to %s\n", out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical toolkit for higher k-energies on model Kaehler manifolds"};
  app.require_subcommand(1);

  std::string config_path, out_path, manifold, resolution, quantity, potential, field, initial;
  std::vector<std::string> suites;
  int k = 0, threads = 0, steps = 0, n_t = 0;
  double tol = 0.0;

  CLI::App* verify = app.add_subcommand("verify", "run check suites and write a report");
  verify->add_option("--suite", suites, "suites to run (smoke, theorem1, theorem3, chern, "
                                        "futaki, descent, all); repeatable");
  verify->add_option("--manifold", manifold, "restrict checks to one manifold (cp1, cp2, torus)");
  verify->add_option("--k", k, "restrict checks to one form degree");
  verify->add_option("--tol", tol, "scale every tolerance by this factor (default 1)");

  CLI::App* compute = app.add_subcommand("compute", "evaluate one quantity on 3 refinements");
  compute->add_option("--quantity", quantity, "mu, energy, futaki, lambda, lagrangian");
  compute->add_option("--manifold", manifold, "cp1, cp2, torus");
  compute->add_option("--k", k, "form degree (default 1)");
  compute->add_option("--resolution", resolution, "base grid, e.g. 48x24");
  compute->add_option("--potential", potential, "fs | radial:c1,c2,... | fourier:p,q,ac,as;...");
  compute->add_option("--field", field, "futaki only: diag:re,im[,re2,im2] | const:re,im");
  compute->add_option("--n-t", n_t, "time quadrature order (default 16)");

  CLI::App* descend = app.add_subcommand("descend", "gradient descent, CSV trajectory");
  descend->add_option("--manifold", manifold, "cp1, cp2, torus");
  descend->add_option("--k", k, "form degree (default 1)");
  descend->add_option("--resolution", resolution, "grid, e.g. 24x12");
  descend->add_option("--steps", steps, "step budget (default 200)");
  descend->add_option("--initial", initial, "starting coefficients c1,c2,...");
  descend->add_option("--tol", tol, "target residual (default 1e-4)");

  for (CLI::App* sub : {verify, compute, descend}) {
    sub->add_option("--config", config_path, "flat key = value configuration file");
    sub->add_option("--out", out_path, "output path (JSON report / JSON result / CSV)");
    sub->add_option("--threads", threads, "worker threads (default 1)");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    kenergy::RunConfig cfg = load_config(config_path);
    CLI::App* sub = app.get_subcommands().front();
    // command-line flags override config-file entries
    auto override_if = [&](const char* flag, const char* key, const std::string& value) {
      const CLI::Option* opt = sub->get_option_no_throw(flag);
      if (opt && opt->count() > 0) cfg.set(key, value);
    };
    override_if("--manifold", "manifold", manifold);
    override_if("--k", "k", std::to_string(k));
    override_if("--resolution", "resolution", resolution);
    override_if("--quantity", "quantity", quantity);
    override_if("--potential", "potential", potential);
    override_if("--field", "field", field);
    override_if("--n-t", "n_t", std::to_string(n_t));
    override_if("--steps", "steps", std::to_string(steps));
    override_if("--initial", "initial", initial);
    override_if("--threads", "threads", std::to_string(threads));
    override_if("--out", "out", out_path);
    if (sub == verify) {
      if (!suites.empty()) {
        std::string joined;
        for (const auto& s : suites) joined += (joined.empty() ? "" : ",") + s;
        cfg.set("suite", joined);
      }
      if (sub->count("--tol") > 0) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", tol);
        cfg.set("tol", buf);
      }
      return cmd_verify(cfg);
    }
    if (sub == compute) return cmd_compute(cfg);
    if (sub->count("--tol") > 0) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", tol);
      cfg.set("tol", buf);
    }
    return cmd_descend(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
