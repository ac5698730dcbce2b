// SPDX-License-Identifier: Apache-2.0

#include "bmti/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "bmti/csv_io.hpp"
#include "bmti/datasets.hpp"
#include "bmti/error.hpp"
#include "bmti/evaluation.hpp"

namespace bmti {

namespace {

using nlohmann::json;

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config key '") + key + "': " + e.what());
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

EstimatorParams params_from_json(const json& j, EstimatorParams p) {
  if (!j.is_object()) throw ParameterError("estimator_params must be an object");
  static const std::set<std::string> known = {"k_min",        "k_max",       "lr_threshold", "alpha",
                                              "precision_mode", "cg_tol",    "cg_max_iter",  "uncertainties",
                                              "id",           "discard_fraction", "eps2_min", "k",
                                              "bandwidth",    "volume_dim"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ParameterError("unknown estimator parameter '" + key + "'");
  if (j.contains("k_min")) p.adaptive.k_min = get_as<std::size_t>(j, "k_min");
  if (j.contains("k_max")) p.adaptive.k_max = get_as<std::size_t>(j, "k_max");
  if (j.contains("lr_threshold")) p.adaptive.lr_threshold = get_as<double>(j, "lr_threshold");
  if (j.contains("alpha")) p.alpha = get_as<double>(j, "alpha");
  if (j.contains("precision_mode")) p.precision_mode = parse_precision_mode(get_as<std::string>(j, "precision_mode"));
  if (j.contains("cg_tol")) p.cg_tol = get_as<double>(j, "cg_tol");
  if (j.contains("cg_max_iter")) p.cg_max_iter = get_as<std::size_t>(j, "cg_max_iter");
  if (j.contains("uncertainties")) p.uncertainties = get_as<bool>(j, "uncertainties");
  if (j.contains("id")) {
    const auto& v = j.at("id");
    if (v.is_string() && v.get<std::string>() == "auto") p.id.reset();
    else p.id = get_as<double>(j, "id");
  }
  if (j.contains("discard_fraction")) p.discard_fraction = get_as<double>(j, "discard_fraction");
  if (j.contains("eps2_min")) p.eps2_min = get_as<double>(j, "eps2_min");
  if (j.contains("k")) p.knn_k = get_as<std::size_t>(j, "k");
  if (j.contains("bandwidth")) p.bandwidth = get_as<double>(j, "bandwidth");
  if (j.contains("volume_dim")) {
    const auto v = get_as<std::string>(j, "volume_dim");
    if (v == "id") p.knn_volume_dim = VolumeDim::intrinsic;
    else if (v == "embed") p.knn_volume_dim = VolumeDim::embedding;
    else throw ParameterError("volume_dim must be 'id' or 'embed'");
  }
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) throw ParameterError("alpha must lie in [0, 1]");
  return p;
}

BenchmarkConfig parse_benchmark_config(const json& j) {
  if (!j.is_object()) throw ParameterError("benchmark config must be a JSON object");
  for (const char* key : {"datasets", "methods", "seeds", "sizes"})
    if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty())
      throw ParameterError(std::string("benchmark config needs a non-empty '") + key + "' array");
  BenchmarkConfig c;
  for (const auto& d : j.at("datasets")) {
    if (d.is_string()) {
      c.datasets.push_back({d.get<std::string>(), std::nullopt});
    } else if (d.is_object()) {
      DatasetSpec s{get_as<std::string>(d, "name"), std::nullopt};
      if (d.contains("beta")) s.beta = get_as<double>(d, "beta");
      c.datasets.push_back(s);
    } else {
      throw ParameterError("datasets entries must be names or {name, beta} objects");
    }
  }
  c.methods = get_as<std::vector<std::string>>(j, "methods");
  c.seeds = get_as<std::vector<std::uint64_t>>(j, "seeds");
  c.sizes = get_as<std::vector<std::size_t>>(j, "sizes");
  if (j.contains("estimator_params")) c.params = params_from_json(j.at("estimator_params"));
  return c;
}

BenchmarkConfig load_benchmark_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open benchmark config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(path + ": invalid JSON: " + e.what());
  }
  return parse_benchmark_config(j);
}

EvaluationReport evaluate_estimate(const MethodResult& result, const PointCloud& cloud) {
  EvaluationReport r;
  r.method = result.method;
  r.n = cloud.size();
  r.D = cloud.dim();
  r.d_used = result.d_used;
  const auto truth = cloud.truth();
  const auto al = align_and_mae(result.F, truth);
  r.mae = al.mae;
  r.aligned_offset = al.offset;
  r.pull_mean = r.pull_std = std::numeric_limits<double>::quiet_NaN();
  if (result.sigma_F) {
    std::vector<double> err, val, ref;
    for (std::size_t i = 0; i < result.F.size(); ++i) {
      if (!((*result.sigma_F)[i] > 0.0)) continue;
      val.push_back(result.F[i] + al.offset);
      err.push_back((*result.sigma_F)[i]);
      ref.push_back(truth[i]);
    }
    if (val.size() > 1) {
      const auto ps = pull_statistics(val, err, ref);
      r.pull_mean = ps.mean;
      r.pull_std = ps.std;
    }
  }
  r.warnings = result.warnings;
  return r;
}

std::vector<EvaluationReport> run_benchmark(const BenchmarkConfig& config) {
  std::vector<EvaluationReport> reports;
  for (const auto& ds : config.datasets)
    for (std::size_t n : config.sizes)
      for (std::uint64_t seed : config.seeds) {
        std::optional<GeneratedDataset> data;
        std::string gen_error;
        try {
          data = generate_dataset(ds.name, n, seed, ds.beta);
        } catch (const std::exception& e) {
          gen_error = std::string("generate: ") + e.what();
        }
        for (const auto& method : config.methods) {
          EvaluationReport r;
          if (data) {
            const auto t0 = std::chrono::steady_clock::now();
            try {
              const auto est = estimate_method(data->cloud, method, config.params);
              const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
              r = evaluate_estimate(est, data->cloud);
              r.runtime_seconds = secs;
              r.warnings.insert(r.warnings.end(), data->warnings.begin(), data->warnings.end());
            } catch (const std::exception& e) {
              r.error = e.what();
            }
          } else {
            r.error = gen_error;
          }
          r.method = method;
          r.dataset = ds.name;
          r.beta = data ? data->beta : ds.beta.value_or(std::numeric_limits<double>::quiet_NaN());
          r.n = n;
          r.seed = seed;
          if (r.error) {
            r.mae = r.aligned_offset = r.pull_mean = r.pull_std = std::numeric_limits<double>::quiet_NaN();
            r.d_used = r.runtime_seconds = std::numeric_limits<double>::quiet_NaN();
          }
          reports.push_back(std::move(r));
        }
      }
  return reports;
}

json reports_to_json(const std::vector<EvaluationReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) {
    json o;
    o["method"] = r.method;
    o["dataset"] = r.dataset;
    o["beta"] = number_or_null(r.beta);
    o["n"] = r.n;
    o["D"] = r.D;
    o["d_used"] = number_or_null(r.d_used);
    o["mae"] = number_or_null(r.mae);
    o["aligned_offset"] = number_or_null(r.aligned_offset);
    o["pull_mean"] = number_or_null(r.pull_mean);
    o["pull_std"] = number_or_null(r.pull_std);
    o["runtime_seconds"] = number_or_null(r.runtime_seconds);
    o["seed"] = r.seed;
    o["error"] = r.error ? json(*r.error) : json(nullptr);
    o["warnings"] = r.warnings;
    arr.push_back(std::move(o));
  }
  return json{{"schema", kReportSchema}, {"reports", std::move(arr)}};
}

void write_reports_json(const std::string& path, const std::vector<EvaluationReport>& reports) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << reports_to_json(reports).dump(2) << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

void write_reports_csv(const std::string& path, const std::vector<EvaluationReport>& reports) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "dataset,method,n,seed,D,d_used,mae,aligned_offset,pull_mean,pull_std,runtime_seconds,error\n";
  for (const auto& r : reports) {
    std::string err = r.error ? *r.error : "";
    for (char& c : err)
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    out << r.dataset << ',' << r.method << ',' << r.n << ',' << r.seed << ',' << r.D << ','
        << format_double(r.d_used) << ',' << format_double(r.mae) << ',' << format_double(r.aligned_offset)
        << ',' << format_double(r.pull_mean) << ',' << format_double(r.pull_std) << ','
        << format_double(r.runtime_seconds) << ',' << err << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace bmti
