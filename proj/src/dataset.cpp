#include "mmgc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "mmgc/error.hpp"

namespace mmgc {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

bool parse_real(const std::string& s, double& value) {
  if (s.empty()) return false;
  char* end = nullptr;
  value = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(value);
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() < 1 || features.cols() < 1)
    throw InvalidArgument("dataset needs at least one point and one feature");
  if (!features.allFinite()) throw InvalidArgument("dataset contains non-finite feature values");
  if (class_labels && class_labels->size() != size())
    throw InvalidArgument("class label count does not match point count");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= size()) throw InvalidArgument("subset row out of range");
    out.features.row(static_cast<Eigen::Index>(k)) = features.row(static_cast<Eigen::Index>(rows[k]));
  }
  if (class_labels) {
    std::vector<std::string> labels;
    labels.reserve(rows.size());
    for (auto r : rows) labels.push_back((*class_labels)[r]);
    out.class_labels = std::move(labels);
  }
  return out;
}

Dataset parse_csv_dataset(const std::string& text, const LabelColumn& label_column, bool header) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header_names;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  std::size_t arity = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    auto fields = split_fields(line);
    if (header && header_names.empty()) {
      header_names = std::move(fields);
      arity = header_names.size();
      continue;
    }
    if (arity == 0) arity = fields.size();
    if (fields.size() != arity)
      throw ParseError("expected " + std::to_string(arity) + " fields, found " + std::to_string(fields.size()), line_no);
    rows.push_back(std::move(fields));
    row_lines.push_back(line_no);
  }
  if (rows.empty()) throw ParseError("no rows");

  std::optional<std::size_t> label_idx;
  if (std::holds_alternative<long>(label_column)) {
    long idx = std::get<long>(label_column);
    if (idx < 0) idx += static_cast<long>(arity);
    if (idx < 0 || idx >= static_cast<long>(arity))
      throw InvalidArgument("label column index " + std::to_string(std::get<long>(label_column)) + " is outside the " +
                            std::to_string(arity) + " columns");
    label_idx = static_cast<std::size_t>(idx);
  } else if (std::holds_alternative<std::string>(label_column)) {
    const auto& name = std::get<std::string>(label_column);
    auto it = std::find(header_names.begin(), header_names.end(), name);
    if (it == header_names.end()) throw InvalidArgument("label column '" + name + "' not found in header");
    label_idx = static_cast<std::size_t>(it - header_names.begin());
  }

  const std::size_t n_features = arity - (label_idx ? 1 : 0);
  if (n_features == 0) throw InvalidArgument("no feature columns");

  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_features));
  std::vector<std::string> labels;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < arity; ++c) {
      if (label_idx && c == *label_idx) {
        labels.push_back(rows[r][c]);
        continue;
      }
      double v = 0.0;
      if (!parse_real(rows[r][c], v))
        throw ParseError("non-numeric feature '" + rows[r][c] + "' in column " + std::to_string(c), row_lines[r]);
      d.features(static_cast<Eigen::Index>(r), col++) = v;
    }
  }
  if (label_idx) d.class_labels = std::move(labels);
  return d;
}

Dataset load_csv_dataset(const std::string& path, const LabelColumn& label_column, bool header) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_dataset(buf.str(), label_column, header);
}

void write_csv_dataset(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << std::setprecision(17);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (Eigen::Index m = 0; m < d.features.cols(); ++m) {
      if (m) out << ',';
      out << d.features(static_cast<Eigen::Index>(i), m);
    }
    if (d.class_labels) out << ',' << (*d.class_labels)[i];
    out << '\n';
  }
}

StandardizationStats compute_standardization(const Dataset& d, std::span<const std::size_t> over) {
  if (over.empty()) throw InvalidArgument("standardization needs a nonempty index set");
  const Eigen::Index k = d.features.cols();
  StandardizationStats s;
  s.mean = Eigen::VectorXd::Zero(k);
  s.stddev = Eigen::VectorXd::Zero(k);
  for (auto i : over) s.mean += d.features.row(static_cast<Eigen::Index>(i)).transpose();
  s.mean /= static_cast<double>(over.size());
  for (auto i : over) {
    Eigen::VectorXd diff = d.features.row(static_cast<Eigen::Index>(i)).transpose() - s.mean;
    s.stddev += diff.cwiseAbs2();
  }
  s.stddev = (s.stddev / static_cast<double>(over.size())).cwiseSqrt();
  s.sigma_bar = s.stddev.mean();
  return s;
}

Dataset apply_standardization(const Dataset& d, const StandardizationStats& stats) {
  Dataset out = d;
  for (Eigen::Index m = 0; m < out.features.cols(); ++m) {
    const double sd = stats.stddev(m) > 0.0 ? stats.stddev(m) : 1.0;
    out.features.col(m) = (out.features.col(m).array() - stats.mean(m)) / sd;
  }
  return out;
}

std::vector<std::string> ordered_classes(const Dataset& d) {
  if (!d.class_labels) throw InvalidArgument("dataset has no class labels");
  std::set<std::string> distinct(d.class_labels->begin(), d.class_labels->end());
  std::vector<std::string> classes(distinct.begin(), distinct.end());
  bool numeric = true;
  double tmp = 0.0;
  for (const auto& c : classes) numeric = numeric && parse_real(c, tmp);
  if (numeric) {
    std::stable_sort(classes.begin(), classes.end(), [](const std::string& a, const std::string& b) {
      return std::strtod(a.c_str(), nullptr) < std::strtod(b.c_str(), nullptr);
    });
  }
  return classes;
}

std::vector<BinaryTask> decompose_binary_tasks(const Dataset& d, TaskScheme scheme) {
  const auto classes = ordered_classes(d);
  if (classes.size() < 2) throw InvalidArgument("binary decomposition needs at least 2 classes");

  auto make_task = [&](const std::string& pos, const std::string& neg) {
    BinaryTask t{pos, neg, {}, {}};
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto& c = (*d.class_labels)[i];
      if (c == pos || c == neg) {
        t.point_indices.push_back(i);
        t.signed_labels.push_back(c == pos ? 1 : -1);
      }
    }
    return t;
  };

  std::vector<BinaryTask> tasks;
  if (scheme == TaskScheme::one_vs_one) {
    for (std::size_t a = 0; a < classes.size(); ++a)
      for (std::size_t b = a + 1; b < classes.size(); ++b) tasks.push_back(make_task(classes[a], classes[b]));
  } else {
    for (std::size_t a = 0; a + 1 < classes.size(); ++a) tasks.push_back(make_task(classes[a], classes[a + 1]));
  }
  return tasks;
}

SplitSpec make_split(const BinaryTask& task, double labeled_fraction, std::uint64_t seed) {
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0))
    throw InvalidArgument("labeled fraction must lie in (0, 1]");
  if (task.size() < 3) throw InvalidArgument("a split needs at least 3 points");
  if (task.signed_labels.size() != task.size()) throw InvalidArgument("task labels misaligned with points");

  std::vector<std::size_t> pos, neg;
  for (std::size_t k = 0; k < task.size(); ++k) (task.signed_labels[k] > 0 ? pos : neg).push_back(k);
  if (pos.empty() || neg.empty()) throw InvalidArgument("a split needs both classes present");

  std::mt19937_64 rng(seed);
  SplitSpec s;
  s.seed = seed;
  for (auto* cls : {&pos, &neg}) {
    std::shuffle(cls->begin(), cls->end(), rng);
    const std::size_t c = cls->size();
    const std::size_t third = c / 3;
    const std::size_t n_train = c - 2 * third;
    s.train.insert(s.train.end(), cls->begin(), cls->begin() + static_cast<long>(n_train));
    s.validation.insert(s.validation.end(), cls->begin() + static_cast<long>(n_train),
                        cls->begin() + static_cast<long>(n_train + third));
    s.test.insert(s.test.end(), cls->begin() + static_cast<long>(n_train + third), cls->end());
  }
  std::shuffle(s.train.begin(), s.train.end(), rng);
  std::shuffle(s.validation.begin(), s.validation.end(), rng);

  const std::size_t n_train = s.train.size();
  const auto raw = static_cast<std::size_t>(std::llround(labeled_fraction * static_cast<double>(n_train)));
  const std::size_t n_l = std::min(n_train, std::max<std::size_t>(2, raw));

  // Would an unstratified draw of `raw` points have covered both classes?
  bool saw_pos = false, saw_neg = false;
  for (std::size_t k = 0; k < std::min(raw, n_train); ++k)
    (task.signed_labels[s.train[k]] > 0 ? saw_pos : saw_neg) = true;
  s.labeled_count_promoted = !(saw_pos && saw_neg);

  std::vector<char> chosen(n_train, 0);
  auto first_of = [&](int label) {
    for (std::size_t k = 0; k < n_train; ++k)
      if (task.signed_labels[s.train[k]] == label) return k;
    return n_train;
  };
  for (int label : {1, -1}) {
    const auto k = first_of(label);
    chosen[k] = 1;
    s.labeled.push_back(s.train[k]);
  }
  for (std::size_t k = 0; k < n_train && s.labeled.size() < n_l; ++k) {
    if (chosen[k]) continue;
    chosen[k] = 1;
    s.labeled.push_back(s.train[k]);
  }
  for (std::size_t k = 0; k < n_train; ++k)
    if (!chosen[k]) s.unlabeled.push_back(s.train[k]);

  if (s.validation.size() > n_l) s.validation.resize(n_l);

  for (auto* v : {&s.train, &s.validation, &s.test, &s.labeled, &s.unlabeled}) std::sort(v->begin(), v->end());
  return s;
}

BinaryTask subsample_task(const BinaryTask& task, std::size_t max_points, std::uint64_t seed) {
  if (task.size() <= max_points) return task;
  if (max_points < 2) throw InvalidArgument("subsample needs room for both classes");
  std::vector<std::size_t> pos, neg;
  for (std::size_t k = 0; k < task.size(); ++k) (task.signed_labels[k] > 0 ? pos : neg).push_back(k);

  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  const double share = static_cast<double>(pos.size()) / static_cast<double>(task.size());
  std::size_t keep_pos = static_cast<std::size_t>(std::llround(share * static_cast<double>(max_points)));
  keep_pos = std::clamp<std::size_t>(keep_pos, pos.empty() ? 0 : 1, std::min(pos.size(), max_points - (neg.empty() ? 0 : 1)));
  const std::size_t keep_neg = std::min(neg.size(), max_points - keep_pos);

  std::vector<std::size_t> keep(pos.begin(), pos.begin() + static_cast<long>(keep_pos));
  keep.insert(keep.end(), neg.begin(), neg.begin() + static_cast<long>(keep_neg));
  std::sort(keep.begin(), keep.end());

  BinaryTask out{task.positive_class, task.negative_class, {}, {}};
  for (auto k : keep) {
    out.point_indices.push_back(task.point_indices[k]);
    out.signed_labels.push_back(task.signed_labels[k]);
  }
  return out;
}

}  // namespace mmgc
