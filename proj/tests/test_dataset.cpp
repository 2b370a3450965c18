#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>

#include "mmgc/dataset.hpp"
#include "mmgc/error.hpp"

using namespace mmgc;

namespace {

Dataset labeled_points(std::size_t per_class, std::size_t classes, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(per_class * classes), 3);
  std::vector<std::string> ids;
  for (std::size_t c = 0; c < classes; ++c)
    for (std::size_t i = 0; i < per_class; ++i) {
      const auto r = static_cast<Eigen::Index>(c * per_class + i);
      for (Eigen::Index m = 0; m < 3; ++m) d.features(r, m) = noise(rng) + 3.0 * static_cast<double>(c);
      ids.push_back(std::to_string(c));
    }
  d.class_labels = ids;
  return d;
}

}  // namespace

TEST_SUITE("data_model") {
  TEST_CASE("csv with the label in the last column") {
    const Dataset d = parse_csv_dataset("1,2,A\n3,4,B\n5,6,A\n", -1L, false);
    CHECK(d.size() == 3);
    CHECK(d.dimension() == 2);
    CHECK(d.features(2, 1) == 6.0);
    REQUIRE(d.class_labels);
    CHECK(ordered_classes(d) == std::vector<std::string>{"A", "B"});
  }

  TEST_CASE("csv label column by name and by leading index") {
    const Dataset by_name = parse_csv_dataset("a,label,b\n1,x,2\n3,y,4\n", std::string("label"), true);
    CHECK(by_name.dimension() == 2);
    CHECK((*by_name.class_labels)[1] == "y");
    const Dataset first = parse_csv_dataset("T,1,2\nA,3,4\n", 0L, false);
    CHECK(first.features(1, 0) == 3.0);
    CHECK((*first.class_labels)[0] == "T");
    const Dataset unlabeled = parse_csv_dataset("1,2\n3,4\n", std::monostate{}, false);
    CHECK_FALSE(unlabeled.class_labels);
  }

  TEST_CASE("csv errors") {
    CHECK_THROWS_WITH_AS(parse_csv_dataset("", -1L, false), "no rows", ParseError);
    try {
      parse_csv_dataset("1,2,A\nx,4,B\n", -1L, false);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    try {
      parse_csv_dataset("1,2,A\n3,4\n", -1L, false);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_csv_dataset("a,b\n1,2\n", std::string("label"), true), InvalidArgument);
    CHECK_THROWS_AS(parse_csv_dataset("1,2\n", 5L, false), InvalidArgument);
    CHECK_THROWS_AS(load_csv_dataset("/nonexistent/file.csv", -1L, false), InvalidArgument);
  }

  TEST_CASE("csv round trip through a file") {
    const Dataset d = labeled_points(4, 2);
    const auto path = (std::filesystem::temp_directory_path() / "mmgc_dataset_roundtrip.csv").string();
    write_csv_dataset(d, path);
    const Dataset back = load_csv_dataset(path, -1L, false);
    CHECK(back.features.isApprox(d.features, 1e-15));
    CHECK(*back.class_labels == *d.class_labels);
    std::filesystem::remove(path);
  }

  TEST_CASE("validate rejects broken datasets") {
    Dataset d;
    CHECK_THROWS_AS(d.validate(), InvalidArgument);
    d.features = Eigen::MatrixXd::Ones(2, 2);
    d.features(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(d.validate(), InvalidArgument);
    d.features(0, 0) = 1.0;
    d.class_labels = std::vector<std::string>{"a"};
    CHECK_THROWS_AS(d.validate(), InvalidArgument);
  }

  TEST_CASE("standardization statistics") {
    Dataset d;
    d.features.resize(2, 2);
    d.features << 0, 0, 2, 0;
    const std::vector<std::size_t> all{0, 1};
    const auto s = compute_standardization(d, all);
    CHECK(s.mean(0) == doctest::Approx(1.0));
    CHECK(s.mean(1) == doctest::Approx(0.0));
    CHECK(s.stddev(0) == doctest::Approx(1.0));
    CHECK(s.stddev(1) == 0.0);
    CHECK(s.sigma_bar == doctest::Approx(0.5));

    const std::vector<std::size_t> one{1};
    const auto single = compute_standardization(d, one);
    CHECK(single.stddev.isZero());
    CHECK(single.sigma_bar == 0.0);
    CHECK_THROWS_AS(compute_standardization(d, std::vector<std::size_t>{}), InvalidArgument);
  }

  TEST_CASE("standardizing the train fold gives zero mean and unit spread") {
    Dataset d = labeled_points(30, 3, 7);
    d.features.col(2).setConstant(4.0);  // constant feature stays constant
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < d.size(); i += 2) train.push_back(i);
    const auto stats = compute_standardization(d, train);
    const Dataset z = apply_standardization(d, stats);
    const auto again = compute_standardization(z, train);
    CHECK(again.mean.cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(again.stddev(0) - 1.0) <= 1e-10);
    CHECK(std::abs(again.stddev(1) - 1.0) <= 1e-10);
    CHECK(again.stddev(2) == 0.0);
  }

  TEST_CASE("binary task decomposition counts") {
    CHECK(decompose_binary_tasks(labeled_points(2, 10), TaskScheme::one_vs_one).size() == 45);
    CHECK(decompose_binary_tasks(labeled_points(2, 26), TaskScheme::consecutive_pairs).size() == 25);
    const auto two = decompose_binary_tasks(labeled_points(5, 2), TaskScheme::one_vs_one);
    REQUIRE(two.size() == 1);
    CHECK(two[0].size() == 10);
    CHECK(two[0].positive_class == "0");
    CHECK_THROWS_AS(decompose_binary_tasks(labeled_points(5, 1), TaskScheme::one_vs_one), InvalidArgument);
  }

  TEST_CASE("numeric class ids sort numerically") {
    const Dataset d = parse_csv_dataset("1,10\n2,9\n3,2\n", -1L, false);
    CHECK(ordered_classes(d) == std::vector<std::string>{"2", "9", "10"});
    const auto tasks = decompose_binary_tasks(d, TaskScheme::consecutive_pairs);
    REQUIRE(tasks.size() == 2);
    CHECK(tasks[0].positive_class == "2");
    CHECK(tasks[0].negative_class == "9");
    CHECK(tasks[1].positive_class == "9");
  }

  TEST_CASE("tasks hold only their two classes with aligned labels") {
    const Dataset d = labeled_points(6, 4);
    for (const auto& t : decompose_binary_tasks(d, TaskScheme::one_vs_one)) {
      CHECK(t.positive_class != t.negative_class);
      REQUIRE(t.signed_labels.size() == t.point_indices.size());
      for (std::size_t k = 0; k < t.size(); ++k) {
        const auto& id = (*d.class_labels)[t.point_indices[k]];
        CHECK(id == (t.signed_labels[k] > 0 ? t.positive_class : t.negative_class));
      }
    }
  }

  TEST_CASE("split invariants over random tasks and fractions") {
    const Dataset d = labeled_points(50, 2);
    const BinaryTask task = decompose_binary_tasks(d, TaskScheme::one_vs_one).front();
    for (double fraction : {0.01, 0.05, 0.1, 0.5, 1.0})
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SplitSpec s = make_split(task, fraction, seed);
        std::set<std::size_t> train(s.train.begin(), s.train.end()), val(s.validation.begin(), s.validation.end()),
            test(s.test.begin(), s.test.end());
        for (auto i : s.validation) CHECK(train.count(i) == 0);
        for (auto i : s.test) {
          CHECK(train.count(i) == 0);
          CHECK(val.count(i) == 0);
        }
        std::set<std::size_t> lab(s.labeled.begin(), s.labeled.end()), unl(s.unlabeled.begin(), s.unlabeled.end());
        for (auto i : s.labeled) CHECK(train.count(i) == 1);
        for (auto i : s.labeled) CHECK(unl.count(i) == 0);
        CHECK(lab.size() + unl.size() == train.size());
        CHECK(s.validation.size() <= s.labeled.size());
        bool pos = false, neg = false;
        for (auto i : s.labeled) (task.signed_labels[i] > 0 ? pos : neg) = true;
        CHECK((pos && neg));
        CHECK(std::is_sorted(s.train.begin(), s.train.end()));
        const SplitSpec again = make_split(task, fraction, seed);
        CHECK(again.train == s.train);
        CHECK(again.labeled == s.labeled);
        CHECK(again.validation == s.validation);
        CHECK(again.test == s.test);
      }
  }

  TEST_CASE("split sizes at the fraction extremes") {
    const Dataset d = labeled_points(150, 2);
    const BinaryTask task = decompose_binary_tasks(d, TaskScheme::one_vs_one).front();
    const SplitSpec tiny = make_split(task, 0.01, 3);
    CHECK(tiny.train.size() == 100);
    CHECK(tiny.labeled.size() == 2);
    const SplitSpec full = make_split(task, 1.0, 3);
    CHECK(full.labeled.size() == full.train.size());
    CHECK(full.unlabeled.empty());
    CHECK(make_split(task, 0.01, 3).seed == 3);
    CHECK_THROWS_AS(make_split(task, 0.0, 3), InvalidArgument);
    CHECK_THROWS_AS(make_split(task, 1.5, 3), InvalidArgument);
  }

  TEST_CASE("split promotes the labeled count to cover both classes") {
    // 30 points, 10 train: fraction 0.1 asks for one labeled point.
    const Dataset d = labeled_points(15, 2);
    const BinaryTask task = decompose_binary_tasks(d, TaskScheme::one_vs_one).front();
    const SplitSpec s = make_split(task, 0.1, 0);
    CHECK(s.labeled.size() == 2);
    CHECK(s.labeled_count_promoted);
  }

  TEST_CASE("split preconditions") {
    BinaryTask t;
    t.positive_class = "a";
    t.negative_class = "b";
    t.point_indices = {0, 1};
    t.signed_labels = {1, -1};
    CHECK_THROWS_AS(make_split(t, 0.5, 0), InvalidArgument);
    t.point_indices = {0, 1, 2};
    t.signed_labels = {1, 1, 1};
    CHECK_THROWS_AS(make_split(t, 0.5, 0), InvalidArgument);
  }

  TEST_CASE("subsampling keeps both classes and is deterministic") {
    const Dataset d = labeled_points(400, 2);
    const BinaryTask task = decompose_binary_tasks(d, TaskScheme::one_vs_one).front();
    const BinaryTask a = subsample_task(task, 120, 9), b = subsample_task(task, 120, 9);
    CHECK(a.size() <= 120);
    CHECK(a.size() >= 118);
    CHECK(a.point_indices == b.point_indices);
    const auto positives = std::count(a.signed_labels.begin(), a.signed_labels.end(), 1);
    CHECK(positives >= 55);
    CHECK(positives <= 65);
    CHECK(subsample_task(task, 1000, 9).point_indices == task.point_indices);
  }
}
