#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <mutex>
#include <thread>

#include "mmgc/bounds.hpp"
#include "mmgc/error.hpp"
#include "mmgc/graph_cut.hpp"
#include "mmgc/harness.hpp"
#include "mmgc/lapsvm.hpp"

namespace mmgc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(seed);
  for (auto p : parts) h = splitmix64(h ^ p);
  return h;
}

void check_config(const ExperimentConfig& cfg) {
  if (cfg.algorithms.empty()) throw InvalidArgument("no algorithms selected");
  for (const auto& a : cfg.algorithms)
    if (a != "svm" && a != "mr" && a != "gc") throw InvalidArgument("unknown algorithm '" + a + "'");
  if (cfg.kernels.empty()) throw InvalidArgument("no kernels selected");
  if (cfg.labeled_fractions.empty()) throw InvalidArgument("no labeled fractions");
  for (double f : cfg.labeled_fractions)
    if (!(f > 0.0 && f <= 1.0)) throw InvalidArgument("labeled fractions must lie in (0, 1]");
  if (cfg.gamma_points == 0 || cfg.gamma_u_points == 0) throw InvalidArgument("parameter grids must be nonempty");
  if (!(cfg.gamma_lo > 0.0 && cfg.gamma_hi >= cfg.gamma_lo)) throw InvalidArgument("bad gamma range");
  if (!(cfg.gamma_u_lo > 0.0 && cfg.gamma_u_hi >= cfg.gamma_u_lo)) throw InvalidArgument("bad gamma_u range");
  if (cfg.repetitions == 0) throw InvalidArgument("repetitions must be positive");
  if (cfg.knn_k == 0) throw InvalidArgument("knn_k must be positive");
  if (!(cfg.epsilon >= 0.0)) throw InvalidArgument("epsilon must be nonnegative");
}

/// Runs jobs 0..count-1 on a small pool; results are stored by job index.
template <class Fn>
void run_jobs(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < count;) {
      try {
        fn(j);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

std::string task_name(const BinaryTask& t) { return t.positive_class + "-vs-" + t.negative_class; }

/// Train-fold view of one (task, split): standardized points, graph, labels.
struct Fold {
  Eigen::MatrixXd train;  // rows ordered like split.train
  Eigen::MatrixXd validation;
  Eigen::MatrixXd test;
  std::vector<int> train_truth, validation_truth, test_truth;
  std::vector<LabeledVertex> labeled;  // indices into `train`
  double sigma_bar = 1.0;
  std::size_t dimension = 0;
};

Fold make_fold(const Dataset& data, const BinaryTask& task, const SplitSpec& split, bool standardize) {
  auto rows_of = [&](const std::vector<std::size_t>& positions) {
    std::vector<std::size_t> rows;
    rows.reserve(positions.size());
    for (auto p : positions) rows.push_back(task.point_indices[p]);
    return rows;
  };
  auto truth_of = [&](const std::vector<std::size_t>& positions) {
    std::vector<int> y;
    y.reserve(positions.size());
    for (auto p : positions) y.push_back(task.signed_labels[p]);
    return y;
  };
  const auto train_rows = rows_of(split.train);
  Dataset view = data;
  const StandardizationStats stats = compute_standardization(data, train_rows);
  if (standardize) view = apply_standardization(data, stats);

  Fold f;
  f.dimension = data.dimension();
  f.train = view.subset(train_rows).features;
  f.validation = view.subset(rows_of(split.validation)).features;
  f.test = view.subset(rows_of(split.test)).features;
  f.train_truth = truth_of(split.train);
  f.validation_truth = truth_of(split.validation);
  f.test_truth = truth_of(split.test);

  // Spread of the train fold in the coordinates the learners see.
  const Eigen::RowVectorXd mean = f.train.colwise().mean();
  const Eigen::RowVectorXd sd = ((f.train.rowwise() - mean).array().square().colwise().mean()).sqrt();
  f.sigma_bar = sd.mean();
  if (!(f.sigma_bar > 0.0)) f.sigma_bar = 1.0;

  for (auto p : split.labeled) {
    const auto at = std::lower_bound(split.train.begin(), split.train.end(), p) - split.train.begin();
    f.labeled.push_back({static_cast<std::size_t>(at), task.signed_labels[p]});
  }
  return f;
}

/// Kernels scaled to the data: b = 2 K sigma^2 for the graph, the same width
/// for the RBF kernel, and inner products divided by K sigma^2 for polynomials.
KernelSpec scaled_kernel(const std::string& family, std::size_t dimension, double sigma_bar) {
  const double ks2 = static_cast<double>(dimension) * sigma_bar * sigma_bar;
  if (family == "linear") return KernelSpec::linear();
  if (family == "cubic") return KernelSpec::cubic(1.0 / ks2);
  if (family == "rbf") return KernelSpec::rbf(std::sqrt(ks2));
  return KernelSpec::parse(family);
}

ResultRow base_row(const std::string& dataset, const BinaryTask& task, const std::string& algorithm,
                   const std::string& kernel, double fraction, std::size_t rep) {
  ResultRow r;
  r.dataset = dataset;
  r.task = task_name(task);
  r.algorithm = algorithm;
  r.kernel = kernel;
  r.fraction = fraction;
  r.repetition = static_cast<int>(rep);
  r.val_error = r.test_error = kNaN;
  return r;
}

/// Smallest validation error; ties -> smaller gamma, then larger gamma_g.
const ResultRow* select_row(const std::vector<ResultRow>& cells) {
  const ResultRow* best = nullptr;
  for (const auto& c : cells) {
    if (!c.failure.empty() || std::isnan(c.val_error)) continue;
    if (!best || c.val_error < best->val_error ||
        (c.val_error == best->val_error &&
         (c.gamma < best->gamma || (c.gamma == best->gamma && c.gamma_g > best->gamma_g))))
      best = &c;
  }
  return best;
}

struct JobKey {
  std::size_t task, fraction, rep;
};

std::vector<JobKey> job_keys(std::size_t tasks, std::size_t fractions, std::size_t reps) {
  std::vector<JobKey> keys;
  for (std::size_t t = 0; t < tasks; ++t)
    for (std::size_t f = 0; f < fractions; ++f)
      for (std::size_t r = 0; r < reps; ++r) keys.push_back({t, f, r});
  return keys;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (points == 0) throw InvalidArgument("grid needs at least one point");
  if (!(lo > 0.0 && hi >= lo)) throw InvalidArgument("log grid needs 0 < lo <= hi");
  if (points == 1) return {lo};
  std::vector<double> out(points);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  PreparedData out;
  if (cfg.source == "synthetic") {
    out.name = cfg.dataset_name.empty() ? "synthetic" : cfg.dataset_name;
    out.data = generate_synthetic().data;
  } else {
    out.name = cfg.dataset_name.empty() ? std::filesystem::path(cfg.source).stem().string() : cfg.dataset_name;
    out.data = load_csv_dataset(cfg.source, cfg.label_column, cfg.header);
  }
  out.data.validate();
  if (!out.data.class_labels) throw InvalidArgument("dataset has no class labels");
  auto tasks = decompose_binary_tasks(out.data, cfg.scheme);
  if (cfg.max_tasks > 0 && tasks.size() > cfg.max_tasks) tasks.resize(cfg.max_tasks);
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (cfg.max_points_per_task > 0)
      tasks[t] = subsample_task(tasks[t], cfg.max_points_per_task, mix(cfg.seed, {0x5u, t}));
    out.tasks.push_back(std::move(tasks[t]));
  }
  if (out.tasks.empty()) throw InvalidArgument("dataset yields no binary tasks");
  return out;
}

ResultTable run_uci_protocol(const ExperimentConfig& cfg) { return run_uci_protocol(cfg, prepare_data(cfg)); }

ResultTable run_uci_protocol(const ExperimentConfig& cfg, const PreparedData& prepared) {
  check_config(cfg);
  const auto keys = job_keys(prepared.tasks.size(), cfg.labeled_fractions.size(), cfg.repetitions);
  std::vector<std::vector<ResultRow>> selected(keys.size()), grids(keys.size());
  const std::vector<double> gamma_u_factors = log_grid(cfg.gamma_u_lo, cfg.gamma_u_hi, cfg.gamma_u_points);

  run_jobs(keys.size(), cfg.threads, [&](std::size_t j) {
    const JobKey key = keys[j];
    const BinaryTask& task = prepared.tasks[key.task];
    const double fraction = cfg.labeled_fractions[key.fraction];
    auto& out_sel = selected[j];
    auto& out_grid = grids[j];

    SplitSpec split;
    Fold fold;
    SimilarityGraph graph;
    GraphLaplacian L;
    std::string setup_failure;
    try {
      split = make_split(task, fraction, mix(cfg.seed, {key.task, key.fraction, key.rep}));
      fold = make_fold(prepared.data, task, split, cfg.standardize);
      const double ks2 = static_cast<double>(fold.dimension) * fold.sigma_bar * fold.sigma_bar;
      const std::size_t k = std::min<std::size_t>(cfg.knn_k, fold.train.rows() - 1);
      graph = build_knn_graph(fold.train, k, WeightSpec{2.0 * ks2});
      L = laplacian(graph);
    } catch (const std::exception& e) {
      setup_failure = e.what();
    }
    const double nl = static_cast<double>(fold.labeled.size());
    const std::vector<double> gammas =
        setup_failure.empty() ? log_grid(cfg.gamma_lo * nl, cfg.gamma_hi * nl, cfg.gamma_points) : std::vector<double>{};

    std::vector<int> labeled_y;
    Eigen::MatrixXd labeled_x(static_cast<Eigen::Index>(fold.labeled.size()), fold.train.cols());
    for (std::size_t r = 0; r < fold.labeled.size(); ++r) {
      labeled_x.row(static_cast<Eigen::Index>(r)) = fold.train.row(static_cast<Eigen::Index>(fold.labeled[r].index));
      labeled_y.push_back(fold.labeled[r].label);
    }

    // Harmonic solutions depend on gamma_g only; share them across kernels and gammas.
    std::map<double, HarmonicSolution> harmonic_cache;
    std::map<double, std::string> harmonic_failure;
    auto harmonic_for = [&](double gamma_g) -> const HarmonicSolution& {
      auto it = harmonic_cache.find(gamma_g);
      if (it != harmonic_cache.end()) return it->second;
      auto f = harmonic_failure.find(gamma_g);
      if (f != harmonic_failure.end()) throw Error(f->second);
      try {
        HarmonicConfig hc;
        hc.gamma_g = gamma_g;
        return harmonic_cache.emplace(gamma_g, solve_hard(L, fold.labeled, hc)).first->second;
      } catch (const std::exception& e) {
        harmonic_failure.emplace(gamma_g, e.what());
        throw;
      }
    };

    for (const auto& family : cfg.kernels) {
      const KernelSpec kernel = scaled_kernel(family, fold.dimension, fold.sigma_bar);
      const std::string kname = kernel.family();
      for (const auto& algorithm : cfg.algorithms) {
        std::vector<ResultRow> cells;
        auto evaluate = [&](ResultRow row, auto&& train) {
          const auto start = std::chrono::steady_clock::now();
          try {
            const SvmModel model = train(row);
            row.val_error = misclassification_rate(model, fold.validation, fold.validation_truth);
            row.test_error = misclassification_rate(model, fold.test, fold.test_truth);
          } catch (const std::exception& e) {
            row.failure = e.what();
            row.val_error = row.test_error = kNaN;
          }
          if (cfg.record_timing) row.seconds = seconds_since(start);
          cells.push_back(std::move(row));
        };

        ResultRow proto = base_row(prepared.name, task, algorithm, kname, fraction, key.rep);
        proto.epsilon = algorithm == "gc" ? cfg.epsilon : 0.0;
        if (!setup_failure.empty()) {
          proto.failure = setup_failure;
          out_grid.push_back(proto);
          out_sel.push_back(proto);
          continue;
        }

        for (double gamma : gammas) {
          if (algorithm == "svm") {
            ResultRow row = proto;
            row.gamma = gamma;
            row.induced_size = fold.labeled.size();
            evaluate(row, [&](ResultRow&) {
              SvmConfig sc;
              sc.gamma = gamma;
              sc.tol = cfg.svm_tol;
              return train_svm(labeled_x, labeled_y, kernel, sc);
            });
            continue;
          }
          for (double factor : gamma_u_factors) {
            ResultRow row = proto;
            row.gamma = gamma;
            row.gamma_u = factor * gamma;
            row.gamma_g = cfg.link_gamma_g ? gamma / row.gamma_u : 0.0;
            if (algorithm == "mr") {
              row.induced_size = fold.labeled.size();
              evaluate(row, [&](ResultRow& r) {
                LapSvmConfig lc;
                lc.gamma = r.gamma;
                lc.gamma_u = r.gamma_u;
                lc.kernel = kernel;
                lc.tol = cfg.svm_tol;
                return train_lapsvm(fold.train, L, fold.labeled, lc).model;
              });
            } else {
              evaluate(row, [&](ResultRow& r) {
                GraphCutConfig gc;
                gc.gamma_g = r.gamma_g;
                gc.epsilon = cfg.epsilon;
                gc.kernel = kernel;
                gc.gamma = r.gamma;
                gc.svm_tol = cfg.svm_tol;
                auto res = train_graph_cut(fold.train, harmonic_for(r.gamma_g), fold.labeled, gc);
                r.induced_size = res.induced.indices.size();
                return std::move(res.model);
              });
            }
          }
        }

        if (const ResultRow* best = select_row(cells)) {
          out_sel.push_back(*best);
        } else {
          ResultRow failed = proto;
          failed.failure = cells.empty() ? "no grid cells" : "every grid cell failed: " + cells.front().failure;
          out_sel.push_back(failed);
        }
        for (auto& c : cells) out_grid.push_back(std::move(c));
      }
    }
  });

  ResultTable table;
  for (std::size_t j = 0; j < keys.size(); ++j) {
    for (auto& r : selected[j]) table.rows.push_back(std::move(r));
    for (auto& r : grids[j]) table.grid.push_back(std::move(r));
  }
  table.sort_rows();
  return table;
}

ResultTable run_threshold_study(const ExperimentConfig& cfg, const std::vector<double>& epsilons,
                                const std::vector<double>& gamma_g_values) {
  if (cfg.source == "synthetic") {
    PreparedData none;
    none.name = cfg.dataset_name.empty() ? "synthetic" : cfg.dataset_name;
    return run_threshold_study(cfg, none, epsilons, gamma_g_values);
  }
  return run_threshold_study(cfg, prepare_data(cfg), epsilons, gamma_g_values);
}

ResultTable run_threshold_study(const ExperimentConfig& cfg, const PreparedData& prepared,
                                const std::vector<double>& epsilons, const std::vector<double>& gamma_g_values) {
  check_config(cfg);
  if (epsilons.empty() || gamma_g_values.empty()) throw InvalidArgument("empty epsilon or gamma_g grid");
  for (double e : epsilons)
    if (!(e >= 0.0)) throw InvalidArgument("epsilon must be nonnegative");
  for (double g : gamma_g_values)
    if (!(g >= 0.0)) throw InvalidArgument("gamma_g must be nonnegative");

  const bool synthetic = prepared.tasks.empty();
  const double fraction = cfg.labeled_fractions.front();
  const std::size_t task_count = synthetic ? 1 : prepared.tasks.size();
  const std::size_t reps = synthetic ? 1 : cfg.repetitions;
  const auto keys = job_keys(task_count, 1, reps);
  std::vector<std::vector<ResultRow>> results(keys.size());

  run_jobs(keys.size(), cfg.threads, [&](std::size_t j) {
    const JobKey key = keys[j];
    Fold fold;
    BinaryTask task;
    SimilarityGraph graph;
    KernelSpec kernel;
    std::string setup_failure;
    double row_fraction = fraction;
    try {
      if (synthetic) {
        const SyntheticProblem p = generate_synthetic();
        task.positive_class = "bottom";
        task.negative_class = "top";
        fold.train = fold.validation = fold.test = p.data.features;
        fold.train_truth = fold.validation_truth = fold.test_truth = p.truth;
        fold.labeled = p.labels;
        graph = p.graph;
        kernel = synthetic_kernel(cfg.kernels.front());
        row_fraction = static_cast<double>(p.labels.size()) / static_cast<double>(p.data.size());
      } else {
        task = prepared.tasks[key.task];
        const SplitSpec split = make_split(task, fraction, mix(cfg.seed, {key.task, 0x7u, key.rep}));
        fold = make_fold(prepared.data, task, split, cfg.standardize);
        const double ks2 = static_cast<double>(fold.dimension) * fold.sigma_bar * fold.sigma_bar;
        const std::size_t k = std::min<std::size_t>(cfg.knn_k, fold.train.rows() - 1);
        graph = build_knn_graph(fold.train, k, WeightSpec{2.0 * ks2});
        kernel = scaled_kernel(cfg.kernels.front(), fold.dimension, fold.sigma_bar);
      }
    } catch (const std::exception& e) {
      setup_failure = e.what();
    }
    const GraphLaplacian L = setup_failure.empty() ? laplacian(graph) : GraphLaplacian{};
    const double n = static_cast<double>(fold.train.rows());
    const double gamma = cfg.threshold_gamma_factor * static_cast<double>(std::max<std::size_t>(fold.labeled.size(), 1));
    const bool bias = !synthetic || synthetic_uses_bias(kernel);

    for (double gamma_g : gamma_g_values) {
      HarmonicSolution harmonic;
      std::string harmonic_failure = setup_failure;
      if (harmonic_failure.empty()) {
        try {
          HarmonicConfig hc;
          hc.gamma_g = gamma_g;
          harmonic = solve_hard(L, fold.labeled, hc);
        } catch (const std::exception& e) {
          harmonic_failure = e.what();
        }
      }
      for (double eps : epsilons) {
        ResultRow row = base_row(prepared.name, task, "gc", kernel.family(), row_fraction, key.rep);
        if (synthetic) row.dataset = prepared.name;
        row.gamma = gamma;
        row.gamma_g = gamma_g;
        row.gamma_u = gamma_g > 0.0 ? gamma / gamma_g : std::numeric_limits<double>::infinity();
        row.epsilon = eps;
        for (const char* c : {"thresholded_risk", "induced_risk", "train_error", "kept_fraction", "n_eps"})
          row.extras[c] = kNaN;
        row.extras["n_labeled"] = static_cast<double>(fold.labeled.size());
        const auto start = std::chrono::steady_clock::now();
        try {
          if (!harmonic_failure.empty()) throw Error(harmonic_failure);
          GraphCutConfig gc;
          gc.gamma_g = gamma_g;
          gc.epsilon = eps;
          gc.kernel = kernel;
          gc.gamma = gamma;
          gc.bias = bias;
          gc.svm_tol = cfg.svm_tol;
          const GraphCutResult res = train_graph_cut(fold.train, harmonic, fold.labeled, gc);
          const Eigen::VectorXd scores = res.model.predict_rows(fold.train);
          const EmpiricalRisks risks = empirical_risks(scores, harmonic, fold.labeled, eps);
          row.induced_size = res.induced.indices.size();
          row.val_error = misclassification_rate(res.model, fold.validation, fold.validation_truth);
          row.test_error = misclassification_rate(res.model, fold.test, fold.test_truth);
          row.extras["thresholded_risk"] = risks.thresholded;
          row.extras["induced_risk"] = risks.induced;
          row.extras["train_error"] = misclassification_rate(scores, fold.train_truth);
          row.extras["kept_fraction"] = static_cast<double>(res.induced.indices.size()) / n;
          row.extras["n_eps"] = static_cast<double>(risks.n_eps);
        } catch (const std::exception& e) {
          row.failure = e.what();
        }
        if (cfg.record_timing) row.seconds = seconds_since(start);
        results[j].push_back(std::move(row));
      }
    }
  });

  ResultTable table;
  table.extra_columns = {"thresholded_risk", "induced_risk", "train_error", "kept_fraction", "n_eps", "n_labeled"};
  for (auto& rs : results)
    for (auto& r : rs) table.rows.push_back(std::move(r));
  table.sort_rows();
  return table;
}

}  // namespace mmgc
