// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "bmti/benchmark.hpp"
#include "bmti/csv_io.hpp"
#include "bmti/datasets.hpp"
#include "bmti/error.hpp"
#include "bmti/evaluation.hpp"
#include "bmti/pipeline.hpp"

namespace {

using nlohmann::json;

struct GenerateArgs {
  std::string dataset;
  std::optional<double> beta;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string out;
};

struct EstimateArgs {
  std::string method = "bmti";
  std::string input;
  std::string id = "auto";
  double alpha = 1.0;
  std::string out;
  std::string dump_edges;
  std::string dump_gradients;
  bool uncertainties = false;
  std::optional<std::size_t> k;
  std::optional<double> bandwidth;
  std::string volume_dim = "embed";
  std::string config;
  std::optional<std::size_t> k_min, k_max, cg_max_iter;
  std::optional<double> lr_threshold, cg_tol;
  std::optional<std::string> precision_mode;
};

struct BenchmarkArgs {
  std::string config;
  std::string out;
  std::string csv;
};

struct EvaluateArgs {
  std::string pred;
  std::string truth;
  std::string parity;
  std::string align = "mean";
};

int run_generate(const GenerateArgs& a) {
  auto data = bmti::generate_dataset(a.dataset, a.n, a.seed, a.beta);
  bmti::write_point_cloud(a.out, data.cloud);
  std::cerr << "generated " << data.cloud.size() << " points of " << a.dataset << " (D=" << data.cloud.dim()
            << ", beta=" << data.beta << ", acceptance=" << data.acceptance << ")\n";
  for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

bmti::EstimatorParams estimator_params(const EstimateArgs& a) {
  bmti::EstimatorParams p;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw bmti::IoError("cannot open config '" + a.config + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw bmti::IoError(a.config + ": invalid JSON: " + e.what());
    }
    p = bmti::params_from_json(j.contains("estimator_params") ? j.at("estimator_params") : j);
  }
  if (a.id != "auto") {
    try {
      std::size_t pos = 0;
      p.id = std::stod(a.id, &pos);
      if (pos != a.id.size()) throw std::invalid_argument(a.id);
    } catch (const std::logic_error&) {
      throw bmti::ParameterError("--id must be 'auto' or a positive number, got '" + a.id + "'");
    }
  }
  p.alpha = a.alpha;
  p.uncertainties = a.uncertainties;
  if (a.k) p.knn_k = a.k;
  if (a.bandwidth) p.bandwidth = a.bandwidth;
  p.knn_volume_dim = a.volume_dim == "id" ? bmti::VolumeDim::intrinsic : bmti::VolumeDim::embedding;
  if (a.k_min) p.adaptive.k_min = *a.k_min;
  if (a.k_max) p.adaptive.k_max = *a.k_max;
  if (a.lr_threshold) p.adaptive.lr_threshold = *a.lr_threshold;
  if (a.cg_tol) p.cg_tol = *a.cg_tol;
  if (a.cg_max_iter) p.cg_max_iter = *a.cg_max_iter;
  if (a.precision_mode) p.precision_mode = bmti::parse_precision_mode(*a.precision_mode);
  return p;
}

void write_edges(const std::string& path, const bmti::DeltaFEdgeSet& e) {
  std::ofstream out(path);
  if (!out) throw bmti::IoError("cannot open '" + path + "' for writing");
  out << "i,j,delta_f,eps2,pearson\n";
  for (std::size_t r = 0; r < e.size(); ++r)
    out << e.source[r] << ',' << e.target[r] << ',' << bmti::format_double(e.delta_f[r]) << ','
        << bmti::format_double(e.eps2[r]) << ',' << bmti::format_double(e.pearson[r]) << '\n';
  if (!out) throw bmti::IoError("write to '" + path + "' failed");
}

void write_gradients(const std::string& path, const bmti::GradientField& g, const bmti::NeighborGraph& graph) {
  std::ofstream out(path);
  if (!out) throw bmti::IoError("cannot open '" + path + "' for writing");
  const std::size_t dim = g.dim();
  out << "i";
  for (std::size_t a = 0; a < dim; ++a) out << ",g" << a;
  for (std::size_t a = 0; a < dim; ++a) out << ",sigma_g" << a;
  out << ",k_i,radius\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    out << i;
    for (std::size_t a = 0; a < dim; ++a) out << ',' << bmti::format_double(g.g(i)[static_cast<Eigen::Index>(a)]);
    for (std::size_t a = 0; a < dim; ++a) {
      const auto aa = static_cast<Eigen::Index>(a);
      out << ',' << bmti::format_double(std::sqrt(std::max(g.var(i)(aa, aa), 0.0)));
    }
    out << ',' << graph.k(i) << ',' << bmti::format_double(graph.radius(i)) << '\n';
  }
  if (!out) throw bmti::IoError("write to '" + path + "' failed");
}

int run_estimate(const EstimateArgs& a) {
  const auto cloud = bmti::read_point_cloud(a.input);
  const auto params = estimator_params(a);
  if (a.method != "bmti" && (!a.dump_edges.empty() || !a.dump_gradients.empty() || a.uncertainties))
    throw bmti::ParameterError("--dump-edges, --dump-gradients and --uncertainties need --method bmti");

  bmti::CsvTable table;
  table.header = {"F_hat"};
  std::vector<std::string> warnings;
  if (a.method == "bmti") {
    const auto r = bmti::run_bmti(cloud, params);
    table.columns.push_back(r.estimate.F);
    if (r.estimate.var_F) {
      std::vector<double> s(r.estimate.var_F->size());
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(std::max((*r.estimate.var_F)[i], 0.0));
      table.header.push_back("sigma_F");
      table.columns.push_back(std::move(s));
    }
    table.header.push_back("k_i");
    table.columns.emplace_back(r.graph.ks().begin(), r.graph.ks().end());
    if (!a.dump_edges.empty()) write_edges(a.dump_edges, r.edges);
    if (!a.dump_gradients.empty()) write_gradients(a.dump_gradients, r.gradients, r.graph);
    warnings = r.estimate.warnings;
    std::cerr << "bmti: d=" << r.id.d << " edges=" << r.edges.size() << " components=" << r.system.n_components
              << " cg_iterations=" << r.estimate.cg_iterations << " residual=" << r.estimate.residual << '\n';
  } else {
    auto r = bmti::estimate_method(cloud, a.method, params);
    table.columns.push_back(std::move(r.F));
    std::cerr << a.method << ": d=" << r.d_used << " param=" << r.param << '\n';
  }
  bmti::write_csv(a.out, table);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int run_benchmark_cmd(const BenchmarkArgs& a) {
  const auto config = bmti::load_benchmark_config(a.config);
  const auto reports = bmti::run_benchmark(config);
  bmti::write_reports_json(a.out, reports);
  const std::string csv = a.csv.empty() ? std::filesystem::path(a.out).replace_extension(".csv").string() : a.csv;
  bmti::write_reports_csv(csv, reports);
  std::size_t failed = 0;
  for (const auto& r : reports) {
    if (r.error) {
      ++failed;
      std::cerr << "cell " << r.dataset << '/' << r.method << "/n=" << r.n << "/seed=" << r.seed
                << " failed: " << *r.error << '\n';
    }
  }
  std::cerr << reports.size() << " cells, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}

int run_evaluate(const EvaluateArgs& a) {
  const auto pred = bmti::read_csv(a.pred);
  const auto truth = bmti::read_csv(a.truth);
  const auto f_hat = pred.column("F_hat");
  const auto f_true = truth.column("F_true");
  const auto alignment = a.align == "median" ? bmti::Alignment::median : bmti::Alignment::mean;
  const auto al = bmti::align_and_mae(f_hat, f_true, alignment);
  json out{{"n", f_hat.size()}, {"offset", al.offset}, {"mae", al.mae}, {"alignment", a.align}};
  if (auto s = pred.find("sigma_F")) {
    std::vector<double> val, err, ref;
    for (std::size_t i = 0; i < f_hat.size(); ++i) {
      if (!(pred.columns[*s][i] > 0.0)) continue;
      val.push_back(f_hat[i] + al.offset);
      err.push_back(pred.columns[*s][i]);
      ref.push_back(f_true[i]);
    }
    if (!val.empty()) {
      const auto ps = bmti::pull_statistics(val, err, ref);
      out["pull_mean"] = ps.mean;
      out["pull_std"] = ps.std;
      out["pull_ks_distance"] = ps.ks_distance;
    }
  }
  if (!a.parity.empty()) bmti::parity_export(f_hat, f_true, a.parity);
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binless multidimensional thermodynamic integration: log-density estimation"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Sample a synthetic dataset with ground truth");
  g->add_option("--dataset", gen.dataset, "gauss2d | mb2d | sixd | glassy2d | mb2d-20d")
      ->required()
      ->check(CLI::IsMember(bmti::dataset_names()));
  g->add_option("--beta", gen.beta, "Inverse temperature (default: dataset specific)");
  g->add_option("--n", gen.n, "Number of points")->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--out", gen.out, "Output CSV")->required();

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Estimate the negative log-density at every input point");
  e->add_option("--method", est.method, "bmti | knn | gkde")->check(CLI::IsMember({"bmti", "knn", "gkde"}));
  e->add_option("--input", est.input, "Input CSV with columns x0..x{D-1}[,F_true]")->required();
  e->add_option("--id", est.id, "Intrinsic dimension: auto or a number");
  e->add_option("--alpha", est.alpha, "Mixing between BMTI (1) and the kNN anchor (0)")->check(CLI::Range(0.0, 1.0));
  e->add_option("--out", est.out, "Output CSV")->required();
  e->add_option("--dump-edges", est.dump_edges, "Write per-edge delta F to this CSV");
  e->add_option("--dump-gradients", est.dump_gradients, "Write per-point gradients to this CSV");
  e->add_flag("--uncertainties", est.uncertainties, "Compute per-point standard errors (N <= 2000)");
  e->add_option("--k", est.k, "knn: neighbour count (default: Abramson)");
  e->add_option("--bandwidth", est.bandwidth, "gkde: bandwidth (default: Silverman)");
  e->add_option("--volume-dim", est.volume_dim, "knn: dimension for volumes")->check(CLI::IsMember({"id", "embed"}));
  e->add_option("--config", est.config, "JSON file with estimator parameters");
  e->add_option("--k-min", est.k_min, "Smallest adaptive neighbourhood");
  e->add_option("--k-max", est.k_max, "Largest adaptive neighbourhood");
  e->add_option("--lr-threshold", est.lr_threshold, "Likelihood-ratio threshold");
  e->add_option("--precision-mode", est.precision_mode, "diagonal | optimal_diagonal");
  e->add_option("--cg-tol", est.cg_tol, "Relative residual tolerance");
  e->add_option("--cg-max-iter", est.cg_max_iter, "Iteration cap (default 10 N)");

  BenchmarkArgs bench;
  auto* b = app.add_subcommand("benchmark", "Run a dataset x method x seed x size grid");
  b->add_option("--config", bench.config, "Benchmark JSON config")->required();
  b->add_option("--out", bench.out, "Report JSON")->required();
  b->add_option("--csv", bench.csv, "Summary CSV (default: report path with .csv)");

  EvaluateArgs ev;
  auto* v = app.add_subcommand("evaluate", "Score predictions against ground truth");
  v->add_option("--pred", ev.pred, "CSV with F_hat[,sigma_F]")->required();
  v->add_option("--truth", ev.truth, "CSV with F_true")->required();
  v->add_option("--parity", ev.parity, "Write F_true,F_hat_aligned to this CSV");
  v->add_option("--align", ev.align, "mean | median")->check(CLI::IsMember({"mean", "median"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*g) return run_generate(gen);
    if (*e) return run_estimate(est);
    if (*b) return run_benchmark_cmd(bench);
    if (*v) return run_evaluate(ev);
  } catch (const bmti::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  return 0;
}
