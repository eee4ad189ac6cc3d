// Command-line front end: classify | solve | convergence | mesh.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "layerfem/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw layerfem::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw layerfem::Error("cannot write to '" + path + "'");
  out << content;
}

struct CommonFlags {
  std::string config_path;
  std::string out_path;
  std::string preset;
  std::vector<int> n_values;
  std::vector<double> eps_values;
  int k = 0;
  double rho = 0.0;
  double mu = 0.0;
  std::string generator;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "config file (key = value)");
    app->add_option("--out", out_path, "output path (default: stdout)");
    app->add_option("--preset", preset,
                    "problem preset (rep-bou-tpp, att-mult-bou-tpp, "
                    "int-bou-tpp, two-exp-layer-tpp, manufactured-linear, "
                    "manufactured-semilinear)");
    app->add_option("-N", n_values, "mesh interval counts");
    app->add_option("--eps", eps_values, "perturbation parameters");
    app->add_option("-k", k, "element order");
    app->add_option("--rho", rho, "transition-point factor (default k+1)");
    app->add_option("--mu", mu, "lambda fraction for interior points");
    app->add_option("--generator", generator,
                    "mesh generating function: shishkin | bakhvalov-s");
  }

  layerfem::ExperimentConfig build() const {
    layerfem::ExperimentConfig cfg;
    if (!config_path.empty())
      cfg = layerfem::parse_config(read_file(config_path));
    if (!preset.empty()) {
      cfg.preset = preset;
      layerfem::apply_preset(cfg);
    }
    if (!n_values.empty()) cfg.n_values = n_values;
    if (!eps_values.empty()) cfg.eps_values = eps_values;
    if (k > 0) cfg.k = k;
    if (rho > 0.0) cfg.rho = rho;
    if (mu > 0.0) cfg.mu = mu;
    if (!generator.empty()) cfg.generator = generator;
    if (!out_path.empty()) cfg.out_path = out_path;
    layerfem::validate_config(cfg);
    return cfg;
  }
};

void emit(const layerfem::ExperimentConfig& cfg, const std::string& content) {
  if (cfg.out_path.empty())
    std::cout << content;
  else
    write_file(cfg.out_path, content);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"layerfem: layer-adapted finite elements for singularly "
               "perturbed turning-point problems"};
  app.require_subcommand(1);

  CommonFlags classify_flags, solve_flags, conv_flags, mesh_flags;
  CLI::App* cmd_classify =
      app.add_subcommand("classify", "print the layer map of a problem");
  classify_flags.attach(cmd_classify);
  CLI::App* cmd_solve =
      app.add_subcommand("solve", "single solve with solution dump");
  solve_flags.attach(cmd_solve);
  CLI::App* cmd_conv = app.add_subcommand(
      "convergence", "(N, eps) sweep with a CSV convergence table");
  conv_flags.attach(cmd_conv);
  CLI::App* cmd_mesh = app.add_subcommand("mesh", "dump mesh points");
  mesh_flags.attach(cmd_mesh);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_classify->parsed()) {
      const auto cfg = classify_flags.build();
      emit(cfg, layerfem::run_classify(cfg, cfg.eps_values.front()));
    } else if (cmd_solve->parsed()) {
      const auto cfg = solve_flags.build();
      const auto result =
          layerfem::run_solve(cfg, cfg.n_values.front(), cfg.eps_values.front());
      std::ostringstream os;
      if (result.report) {
        os << "# energy=" << result.report->energy
           << " l2=" << result.report->l2 << " h1=" << result.report->h1_semi
           << " max=" << result.report->max << " (reference: "
           << result.report->reference_note << ")\n";
      }
      if (!result.sol.newton.residual_norms.empty()) {
        os << "# newton iterations=" << result.sol.newton.iterations
           << " residuals=";
        for (double r : result.sol.newton.residual_norms) os << r << ' ';
        os << '\n';
      }
      os << result.dump;
      emit(cfg, os.str());
    } else if (cmd_conv->parsed()) {
      const auto cfg = conv_flags.build();
      const auto sweep = layerfem::run_convergence(cfg);
      emit(cfg, sweep.csv);
    } else if (cmd_mesh->parsed()) {
      const auto cfg = mesh_flags.build();
      const auto mesh =
          layerfem::run_mesh(cfg, cfg.n_values.front(), cfg.eps_values.front());
      emit(cfg, layerfem::mesh_dump(mesh));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
