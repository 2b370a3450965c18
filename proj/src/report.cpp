#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "mmgc/error.hpp"
#include "mmgc/harness.hpp"

namespace mmgc {

const char* const kResultCsvHeader =
    "dataset,task,algorithm,kernel,fraction,repetition,gamma,gamma_u,gamma_g,epsilon,val_error,test_error,induced_size,"
    "seconds";

namespace {

using json = nlohmann::ordered_json;

auto row_key(const ResultRow& r) {
  return std::tie(r.dataset, r.task, r.algorithm, r.kernel, r.fraction, r.repetition, r.gamma, r.gamma_g, r.epsilon,
                  r.gamma_u);
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

double number_or_nan(const json& j) { return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN(); }

json row_json(const ResultRow& r) {
  json j;
  j["dataset"] = r.dataset;
  j["task"] = r.task;
  j["algorithm"] = r.algorithm;
  j["kernel"] = r.kernel;
  j["fraction"] = r.fraction;
  j["repetition"] = r.repetition;
  j["gamma"] = r.gamma;
  j["gamma_u"] = r.gamma_u;
  j["gamma_g"] = r.gamma_g;
  j["epsilon"] = r.epsilon;
  j["val_error"] = r.val_error;
  j["test_error"] = r.test_error;
  j["induced_size"] = r.induced_size;
  j["seconds"] = r.seconds;
  j["failure"] = r.failure;
  json extras = json::object();
  for (const auto& [k, v] : r.extras) extras[k] = v;
  j["extras"] = extras;
  return j;
}

ResultRow row_from_json(const json& j) {
  ResultRow r;
  r.dataset = j.at("dataset").get<std::string>();
  r.task = j.at("task").get<std::string>();
  r.algorithm = j.at("algorithm").get<std::string>();
  r.kernel = j.at("kernel").get<std::string>();
  r.fraction = number_or_nan(j.at("fraction"));
  r.repetition = j.at("repetition").get<int>();
  r.gamma = number_or_nan(j.at("gamma"));
  r.gamma_u = number_or_nan(j.at("gamma_u"));
  r.gamma_g = number_or_nan(j.at("gamma_g"));
  r.epsilon = number_or_nan(j.at("epsilon"));
  r.val_error = number_or_nan(j.at("val_error"));
  r.test_error = number_or_nan(j.at("test_error"));
  r.induced_size = j.at("induced_size").get<std::size_t>();
  r.seconds = number_or_nan(j.at("seconds"));
  r.failure = j.value("failure", std::string());
  if (j.contains("extras"))
    for (const auto& [k, v] : j.at("extras").items()) r.extras[k] = number_or_nan(v);
  return r;
}

json summary_json(const SummaryRow& s) {
  json j;
  j["dataset"] = s.dataset;
  j["algorithm"] = s.algorithm;
  j["kernel"] = s.kernel;
  j["fraction"] = s.fraction;
  j["gamma_g"] = s.gamma_g;
  j["epsilon"] = s.epsilon;
  j["count"] = s.count;
  j["val_error"] = s.val_error;
  j["test_error"] = s.test_error;
  j["induced_size"] = s.induced_size;
  json extras = json::object();
  for (const auto& [k, v] : s.extras) extras[k] = v;
  j["extras"] = extras;
  return j;
}

std::string summary_csv(const std::vector<SummaryRow>& rows, const std::vector<std::string>& extra_columns) {
  std::ostringstream out;
  out << "dataset,algorithm,kernel,fraction,gamma_g,epsilon,count,val_error,test_error,induced_size";
  for (const auto& c : extra_columns) out << ',' << c;
  out << '\n';
  for (const auto& s : rows) {
    out << csv_field(s.dataset) << ',' << s.algorithm << ',' << s.kernel << ',' << fmt(s.fraction) << ','
        << fmt(s.gamma_g) << ',' << fmt(s.epsilon) << ',' << s.count << ',' << fmt(s.val_error) << ','
        << fmt(s.test_error) << ',' << fmt(s.induced_size);
    for (const auto& c : extra_columns) {
      auto it = s.extras.find(c);
      out << ',' << fmt(it == s.extras.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
    }
    out << '\n';
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << text;
  out.close();
  if (!out) throw InvalidArgument("failed writing " + path);
}

}  // namespace

void ResultTable::sort_rows() {
  auto less = [](const ResultRow& a, const ResultRow& b) { return row_key(a) < row_key(b); };
  std::stable_sort(rows.begin(), rows.end(), less);
  std::stable_sort(grid.begin(), grid.end(), less);
}

std::vector<SummaryRow> summarize(const ResultTable& table, bool by_parameters) {
  using Key = std::tuple<std::string, std::string, std::string, double, double, double>;
  std::map<Key, SummaryRow> groups;
  std::map<Key, std::map<std::string, std::size_t>> extra_counts;
  for (const auto& r : table.rows) {
    if (!r.failure.empty()) continue;
    const Key key{r.dataset, r.algorithm, r.kernel, r.fraction, by_parameters ? r.gamma_g : 0.0,
                  by_parameters ? r.epsilon : 0.0};
    auto& s = groups[key];
    if (s.count == 0) {
      s.dataset = r.dataset;
      s.algorithm = r.algorithm;
      s.kernel = r.kernel;
      s.fraction = r.fraction;
      s.gamma_g = std::get<4>(key);
      s.epsilon = std::get<5>(key);
    }
    ++s.count;
    s.val_error += r.val_error;
    s.test_error += r.test_error;
    s.induced_size += static_cast<double>(r.induced_size);
    for (const auto& [k, v] : r.extras) {
      if (std::isnan(v)) continue;
      s.extras[k] += v;
      ++extra_counts[key][k];
    }
  }
  std::vector<SummaryRow> out;
  for (auto& [key, s] : groups) {
    const double c = static_cast<double>(s.count);
    s.val_error /= c;
    s.test_error /= c;
    s.induced_size /= c;
    for (auto& [k, v] : s.extras) v /= static_cast<double>(extra_counts[key][k]);
    out.push_back(std::move(s));
  }
  return out;
}

std::string table_to_csv(const std::vector<ResultRow>& rows, const std::vector<std::string>& extra_columns) {
  std::ostringstream out;
  out << kResultCsvHeader;
  for (const auto& c : extra_columns) out << ',' << c;
  out << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.dataset) << ',' << csv_field(r.task) << ',' << r.algorithm << ',' << r.kernel << ','
        << fmt(r.fraction) << ',' << r.repetition << ',' << fmt(r.gamma) << ',' << fmt(r.gamma_u) << ','
        << fmt(r.gamma_g) << ',' << fmt(r.epsilon) << ',' << fmt(r.val_error) << ',' << fmt(r.test_error) << ','
        << r.induced_size << ',' << fmt(r.seconds);
    for (const auto& c : extra_columns) {
      auto it = r.extras.find(c);
      out << ',' << fmt(it == r.extras.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
    }
    out << '\n';
  }
  return out.str();
}

std::string table_to_json(const ResultTable& table, bool summary_by_parameters) {
  json j;
  j["extra_columns"] = table.extra_columns;
  json summary = json::array();
  for (const auto& s : summarize(table, summary_by_parameters)) summary.push_back(summary_json(s));
  j["summary"] = summary;
  json rows = json::array();
  for (const auto& r : table.rows) rows.push_back(row_json(r));
  j["rows"] = rows;
  json grid = json::array();
  for (const auto& r : table.grid) grid.push_back(row_json(r));
  j["grid"] = grid;
  return j.dump(2) + "\n";
}

ResultTable table_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid report JSON: ") + e.what());
  }
  ResultTable t;
  try {
    if (j.contains("extra_columns")) t.extra_columns = j.at("extra_columns").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) t.rows.push_back(row_from_json(r));
    if (j.contains("grid"))
      for (const auto& r : j.at("grid")) t.grid.push_back(row_from_json(r));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report JSON: ") + e.what());
  }
  return t;
}

std::vector<std::string> emit_reports(const ResultTable& table, ReportFormat format, const std::string& dir,
                                      bool summary_by_parameters) {
  if (table.rows.empty()) throw InvalidArgument("no results");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InvalidArgument("cannot create directory " + dir + ": " + ec.message());

  const auto path = [&](const std::string& stem) {
    return (std::filesystem::path(dir) / (stem + (format == ReportFormat::csv ? ".csv" : ".json"))).string();
  };
  std::vector<std::string> written;
  if (format == ReportFormat::json) {
    json summary = json::array();
    for (const auto& s : summarize(table, summary_by_parameters)) summary.push_back(summary_json(s));
    write_text(path("summary"), summary.dump(2) + "\n");
    written.push_back(path("summary"));
    write_text(path("cells"), table_to_json(table, summary_by_parameters));
    written.push_back(path("cells"));
  } else {
    write_text(path("summary"), summary_csv(summarize(table, summary_by_parameters), table.extra_columns));
    written.push_back(path("summary"));
    write_text(path("cells"), table_to_csv(table.rows, table.extra_columns));
    written.push_back(path("cells"));
    if (!table.grid.empty()) {
      write_text(path("grid"), table_to_csv(table.grid, table.extra_columns));
      written.push_back(path("grid"));
    }
  }
  return written;
}

}  // namespace mmgc
