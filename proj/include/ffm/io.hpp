#ifndef FFM_IO_HPP
#define FFM_IO_HPP

/** @file
 * CSV panels and JSON documents.
 *
 * Panels come in two layouts:
 *  - long: header `time,maturity,value`, one observation per line; missing
 *    cells are simply absent;
 *  - wide: header `time,<m1>,<m2>,...` with numeric maturities; an empty
 *    cell (or NA / ND / nan) is missing.
 * A FunctionalSample is written in the wide layout with the grid points as
 * the header.
 */

#include "ffm/backtest.hpp"
#include "ffm/core.hpp"
#include "ffm/dns.hpp"
#include "ffm/fpca.hpp"
#include "ffm/monte_carlo.hpp"
#include "ffm/pipeline.hpp"
#include "ffm/selection.hpp"
#include "ffm/var.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#ifndef FFM_VERSION
#define FFM_VERSION "0.1.0"
#endif

namespace ffm {

/// Malformed input text (CSV or JSON), with position context.
class ParseError : public Error {
 public:
  using Error::Error;
};

using Json = nlohmann::json;

namespace csv {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Splits one CSV line; double-quoted fields may contain commas.
inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

inline bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "ND" || s == "nan" || s == "NaN" || s == "NAN" ||
         s == "null";
}

inline double parse_number(const std::string& s, std::size_t line, std::size_t column) {
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') {
    ++first;
  }
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(detail::concat("line ", line, ", column ", column, ": '", s,
                                    "' is not a finite number"));
  }
  return value;
}

/// Reads all nonblank lines; returns (line number, fields).
inline std::vector<std::pair<std::size_t, std::vector<std::string>>> read_rows(std::istream& in) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) {
      continue;
    }
    rows.emplace_back(number, split(line));
  }
  return rows;
}

inline std::string format(double v) {
  if (std::isnan(v)) {
    return "";
  }
  // shortest text that reads back to the same double
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace csv

/// Wide layout reader.
inline DiscretePanel read_wide_panel(std::istream& in) {
  const auto rows = csv::read_rows(in);
  if (rows.empty()) {
    throw ParseError("wide panel: empty input");
  }
  const auto& [header_line, header] = rows.front();
  if (header.size() < 2) {
    throw ParseError(detail::concat("line ", header_line,
                                    ": wide panel header needs `time` and at least one maturity"));
  }
  std::vector<double> maturities;
  for (std::size_t c = 1; c < header.size(); ++c) {
    maturities.push_back(csv::parse_number(header[c], header_line, c + 1));
  }
  for (std::size_t c = 1; c < maturities.size(); ++c) {
    if (!(maturities[c] > maturities[c - 1])) {
      throw ParseError(detail::concat("line ", header_line, ", column ", c + 2,
                                      ": maturities must be strictly increasing"));
    }
  }
  Matrix table(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(maturities.size()));
  std::vector<std::string> times;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line, fields] = rows[r];
    if (fields.size() != header.size()) {
      throw ParseError(detail::concat("line ", line, ": expected ", header.size(), " fields, got ",
                                      fields.size()));
    }
    times.push_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      table(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) =
          csv::is_missing_token(fields[c]) ? kMissing : csv::parse_number(fields[c], line, c + 1);
    }
  }
  return DiscretePanel(std::move(maturities), std::move(table), std::move(times));
}

/// Long layout reader; times keep their order of first appearance.
inline DiscretePanel read_long_panel(std::istream& in) {
  const auto rows = csv::read_rows(in);
  if (rows.empty()) {
    throw ParseError("long panel: empty input");
  }
  const auto& [header_line, header] = rows.front();
  if (header.size() != 3 || header[0] != "time" || header[1] != "maturity" || header[2] != "value") {
    throw ParseError(detail::concat("line ", header_line,
                                    ": long panel header must be `time,maturity,value`"));
  }
  std::vector<std::string> times;
  std::map<std::string, std::size_t> time_index;
  std::vector<double> maturities;
  struct Cell {
    std::size_t t;
    double maturity;
    double value;
    std::size_t line;
  };
  std::vector<Cell> cells;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line, fields] = rows[r];
    if (fields.size() != 3) {
      throw ParseError(detail::concat("line ", line, ": expected 3 fields, got ", fields.size()));
    }
    auto [it, inserted] = time_index.try_emplace(fields[0], times.size());
    if (inserted) {
      times.push_back(fields[0]);
    }
    const double maturity = csv::parse_number(fields[1], line, 2);
    if (csv::is_missing_token(fields[2])) {
      maturities.push_back(maturity);
      continue;
    }
    cells.push_back({it->second, maturity, csv::parse_number(fields[2], line, 3), line});
    maturities.push_back(maturity);
  }
  std::sort(maturities.begin(), maturities.end());
  maturities.erase(std::unique(maturities.begin(), maturities.end()), maturities.end());
  Matrix table = Matrix::Constant(static_cast<Eigen::Index>(times.size()),
                                  static_cast<Eigen::Index>(maturities.size()), kMissing);
  for (const auto& cell : cells) {
    const auto col = std::lower_bound(maturities.begin(), maturities.end(), cell.maturity) -
                     maturities.begin();
    double& slot = table(static_cast<Eigen::Index>(cell.t), static_cast<Eigen::Index>(col));
    if (!std::isnan(slot)) {
      throw ParseError(detail::concat("line ", cell.line, ": duplicate observation for time '",
                                      times[cell.t], "' and maturity ", cell.maturity));
    }
    slot = cell.value;
  }
  return DiscretePanel(std::move(maturities), std::move(table), std::move(times));
}

/// Detects the layout from the header line.
inline DiscretePanel read_panel(std::istream& in) {
  std::string first;
  std::streampos start = in.tellg();
  std::getline(in, first);
  in.clear();
  in.seekg(start);
  const auto fields = csv::split(first);
  if (fields.size() == 3 && fields[0] == "time" && fields[1] == "maturity" && fields[2] == "value") {
    return read_long_panel(in);
  }
  return read_wide_panel(in);
}

inline DiscretePanel read_panel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(detail::concat("cannot open '", path, "'"));
  }
  try {
    return read_panel(in);
  } catch (const ParseError& e) {
    throw ParseError(detail::concat(path, ": ", e.what()));
  }
}

inline void write_wide_panel(std::ostream& out, const DiscretePanel& panel) {
  out << "time";
  for (double m : panel.maturities()) {
    out << ',' << csv::format(m);
  }
  out << '\n';
  for (std::size_t t = 0; t < panel.length(); ++t) {
    out << panel.times()[t];
    for (Eigen::Index j = 0; j < panel.table().cols(); ++j) {
      out << ',' << csv::format(panel.table()(static_cast<Eigen::Index>(t), j));
    }
    out << '\n';
  }
}

inline void write_long_panel(std::ostream& out, const DiscretePanel& panel) {
  out << "time,maturity,value\n";
  for (std::size_t t = 0; t < panel.length(); ++t) {
    for (std::size_t j = 0; j < panel.maturities().size(); ++j) {
      const double v = panel.table()(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
      if (!DiscretePanel::is_missing(v)) {
        out << panel.times()[t] << ',' << csv::format(panel.maturities()[j]) << ','
            << csv::format(v) << '\n';
      }
    }
  }
}

inline void write_sample(std::ostream& out, const FunctionalSample& sample) {
  write_wide_panel(out, DiscretePanel(sample.grid().points(), sample.values(), sample.times()));
}

/// Panel whose grid is its own maturities; every cell must be observed.
inline FunctionalSample panel_as_sample(const DiscretePanel& panel) {
  if (panel.table().hasNaN()) {
    throw DataError("panel has missing cells; interpolate it onto a grid instead");
  }
  return FunctionalSample(Grid(panel.maturities()), panel.table(), panel.times());
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline Json matrix_rows(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      row.push_back(std::isfinite(v) ? Json(v) : Json(nullptr));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(std::isfinite(v(i)) ? Json(v(i)) : Json(nullptr));
  }
  return out;
}

inline double json_number(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

inline Matrix matrix_from_rows(const Json& rows, Eigen::Index cols_if_empty = 0) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : cols_if_empty;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Json& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != c) {
      throw ParseError(concat("ragged matrix at row ", i));
    }
    for (Eigen::Index j = 0; j < c; ++j) {
      m(i, j) = json_number(row.at(static_cast<std::size_t>(j)));
    }
  }
  return m;
}

inline Vector vector_from(const Json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = json_number(arr.at(i));
  }
  return v;
}

}  // namespace detail

inline Json grid_to_json(const Grid& grid) {
  if (grid.is_uniform()) {
    return {{"a", grid.lower()}, {"b", grid.upper()}, {"n", grid.size()}};
  }
  return {{"points", grid.points()}};
}

inline Grid grid_from_json(const Json& j) {
  if (j.contains("points")) {
    return Grid(j.at("points").get<std::vector<double>>());
  }
  return make_grid(j.at("a").get<double>(), j.at("b").get<double>(), j.at("n").get<std::size_t>());
}

/// Explicit points are always stored so that round trips are exact.
inline Json fpca_to_json(const FpcaResult& r) {
  Json psi = Json::array();
  for (std::size_t l = 0; l < r.components(); ++l) {
    psi.push_back(detail::vector_json(r.eigenfunctions().col(static_cast<Eigen::Index>(l))));
  }
  return {{"grid", {{"points", r.grid().points()}}},
          {"mean", detail::vector_json(r.mean())},
          {"eigenvalues", detail::vector_json(r.eigenvalues())},
          {"eigenfunctions", psi},
          {"scores", detail::matrix_rows(r.scores())},
          {"total_variance", r.total_variance()}};
}

inline FpcaResult fpca_from_json(const Json& j) {
  Grid grid = grid_from_json(j.at("grid"));
  const Json& psi = j.at("eigenfunctions");
  Matrix eig(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(psi.size()));
  for (std::size_t l = 0; l < psi.size(); ++l) {
    const Vector col = detail::vector_from(psi.at(l));
    if (col.size() != eig.rows()) {
      throw ParseError("eigenfunction length does not match the grid");
    }
    eig.col(static_cast<Eigen::Index>(l)) = col;
  }
  return FpcaResult(std::move(grid), detail::vector_from(j.at("mean")),
                    detail::vector_from(j.at("eigenvalues")), std::move(eig),
                    detail::matrix_from_rows(j.at("scores"), static_cast<Eigen::Index>(psi.size())),
                    j.at("total_variance").get<double>());
}

inline Json var_to_json(const VarFit& fit) {
  Json lags = Json::array();
  for (const auto& a : fit.lags()) {
    lags.push_back(detail::matrix_rows(a));
  }
  return {{"J", fit.dimension()},
          {"m", fit.order()},
          {"restricted", fit.restricted()},
          {"intercept", fit.has_intercept()},
          {"constant", detail::vector_json(fit.intercept())},
          {"coefficients", lags},
          {"sigma_eta", detail::matrix_rows(fit.sigma_eta())},
          {"residuals", detail::matrix_rows(fit.residuals())}};
}

inline VarFit var_from_json(const Json& j) {
  std::vector<Matrix> lags;
  for (const auto& a : j.at("coefficients")) {
    lags.push_back(detail::matrix_from_rows(a));
  }
  const auto dim = static_cast<Eigen::Index>(j.at("J").get<std::size_t>());
  return VarFit(std::move(lags), detail::vector_from(j.at("constant")),
                detail::matrix_from_rows(j.at("residuals"), dim), j.at("restricted").get<bool>(),
                j.value("intercept", false));
}

inline Json selection_to_json(const SelectionGrid& g) {
  Json chosen = Json::object();
  Json criteria = Json::object();
  for (Criterion c : kAllCriteria) {
    const Selection s = g.chosen(c);
    chosen[std::string(to_string(c))] = {{"K", s.factors}, {"p", s.lags}};
    criteria[std::string(to_string(c))] = detail::matrix_rows(g.criterion(c));
  }
  return {{"k_max", g.k_max()},
          {"p_max", g.p_max()},
          {"T", g.sample_length()},
          {"criterion", std::string(to_string(g.primary()))},
          {"innovation_trace", detail::matrix_rows(g.innovation_trace())},
          {"trailing_variance", detail::vector_json(g.trailing_variance())},
          {"mse", detail::matrix_rows(g.mse())},
          {"criteria", criteria},
          {"chosen", chosen},
          {"warnings", g.warnings()}};
}

inline SelectionGrid selection_from_json(const Json& j) {
  return SelectionGrid(j.at("k_max").get<std::size_t>(), j.at("p_max").get<std::size_t>(),
                       j.at("T").get<std::size_t>(),
                       parse_criterion(j.at("criterion").get<std::string>()),
                       detail::matrix_from_rows(j.at("innovation_trace")),
                       detail::vector_from(j.at("trailing_variance")),
                       j.value("warnings", std::vector<std::string>{}));
}

inline Json config_to_json(const FfmConfig& c) {
  Json j = {{"criterion", std::string(to_string(c.criterion))},
            {"k_max", c.k_max},
            {"p_max", c.p_max},
            {"restricted", c.restricted},
            {"intercept", c.intercept}};
  if (c.fixed) {
    j["fixed"] = {{"K", c.fixed->factors}, {"p", c.fixed->lags}};
  }
  return j;
}

inline FfmConfig config_from_json(const Json& j) {
  FfmConfig c;
  c.criterion = parse_criterion(j.at("criterion").get<std::string>());
  c.k_max = j.at("k_max").get<std::size_t>();
  c.p_max = j.at("p_max").get<std::size_t>();
  c.restricted = j.at("restricted").get<bool>();
  c.intercept = j.value("intercept", false);
  if (j.contains("fixed")) {
    c.fixed = Selection{j.at("fixed").at("K").get<std::size_t>(), j.at("fixed").at("p").get<std::size_t>()};
  }
  return c;
}

/// Whole fitted model as one document.
inline Json model_to_json(const FfmModel& m) {
  Json j = {{"format", "ffm-model"},
            {"version", FFM_VERSION},
            {"config", config_to_json(m.config())},
            {"K", m.factors()},
            {"p", m.lags()},
            {"fpca", fpca_to_json(m.fpca())},
            {"var", var_to_json(m.var_fit())},
            {"diagnostic",
             {{"r_squared", m.diagnostic().r_squared},
              {"criterion_gain", m.diagnostic().criterion_gain},
              {"insignificant", m.diagnostic().insignificant}}},
            {"warnings", m.warnings()}};
  if (m.selection()) {
    j["selection"] = selection_to_json(*m.selection());
  }
  return j;
}

inline FfmModel model_from_json(const Json& j) {
  if (j.value("format", std::string{}) != "ffm-model") {
    throw ParseError("not an ffm-model document");
  }
  std::optional<SelectionGrid> grid;
  if (j.contains("selection")) {
    grid = selection_from_json(j.at("selection"));
  }
  DynamicsDiagnostic d;
  d.r_squared = j.at("diagnostic").at("r_squared").get<double>();
  d.criterion_gain = j.at("diagnostic").at("criterion_gain").get<double>();
  d.insignificant = j.at("diagnostic").at("insignificant").get<bool>();
  return FfmModel(fpca_from_json(j.at("fpca")), std::move(grid), var_from_json(j.at("var")),
                  config_from_json(j.at("config")),
                  j.value("warnings", std::vector<std::string>{}), d);
}

inline Json dns_to_json(const DnsModel& m) {
  return {{"format", "dns-model"},
          {"lambda", m.lambda()},
          {"maturities", m.maturities()},
          {"beta", detail::matrix_rows(m.beta())},
          {"var", var_to_json(m.dynamics())}};
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(detail::concat("cannot open '", path, "'"));
  }
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(detail::concat(path, ": ", e.what()));
  }
}

// ---------------------------------------------------------------------------
// Tabular outputs

inline void write_surface_csv(std::ostream& out, const SelectionGrid& grid) {
  out << "J,m,mse,criterion_value,chosen\n";
  for (const auto& row : export_mse_surface(grid)) {
    out << row.j << ',' << row.m << ',' << csv::format(row.mse) << ','
        << csv::format(row.criterion_value) << ',' << (row.chosen ? 1 : 0) << '\n';
  }
}

inline void write_forecast_csv(std::ostream& out, const ForecastResult& fc) {
  out << "horizon,r,value\n";
  for (Eigen::Index k = 0; k < fc.curves.rows(); ++k) {
    for (std::size_t i = 0; i < fc.grid.size(); ++i) {
      out << (k + 1) << ',' << csv::format(fc.grid.points()[i]) << ','
          << csv::format(fc.curves(k, static_cast<Eigen::Index>(i))) << '\n';
    }
  }
}

inline void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << (c ? "," : "") << header[c];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j ? "," : "") << csv::format(m(i, j));
    }
    out << '\n';
  }
}

inline void write_mc_csv(std::ostream& out, const std::vector<McReport>& reports) {
  out << "model,T,criterion,bias_K,bias_p,rmse_K,rmse_p\n";
  for (const auto& r : reports) {
    for (const auto& s : r.criteria) {
      out << r.model << ',' << r.length << ',' << to_string(s.criterion) << ','
          << csv::format(s.factors.bias) << ',' << csv::format(s.lags.bias) << ','
          << csv::format(s.factors.rmse) << ',' << csv::format(s.lags.rmse) << '\n';
    }
  }
}

/// K and p columns read "BIC"/"HQC" for criterion-driven runs and "-" for DNS.
inline void write_backtest_csv(std::ostream& out, const std::vector<std::pair<BacktestReport, BacktestOptions>>& runs) {
  out << "method,K,p,dynamics,horizon,rmsfe\n";
  for (const auto& [r, o] : runs) {
    std::string k = "-";
    std::string p = "-";
    if (o.method == BacktestMethod::FfmFixed) {
      k = std::to_string(o.fixed.factors);
      p = std::to_string(o.fixed.lags);
    } else if (o.method == BacktestMethod::FfmCriterion) {
      k = p = std::string(to_string(o.criterion));
      std::transform(k.begin(), k.end(), k.begin(), ::toupper);
      p = k;
    } else {
      k = "3";
      p = "1";
    }
    out << r.method << ',' << k << ',' << p << ',' << (o.restricted ? "AR" : "VAR") << ','
        << r.horizon << ',' << csv::format(r.rmsfe) << '\n';
  }
}

inline Json backtest_to_json(const BacktestReport& r) {
  Json sel = Json::array();
  for (const auto& s : r.selections) {
    sel.push_back({s.factors, s.lags});
  }
  Json errors = Json::array();
  for (Eigen::Index i = 0; i < r.errors.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < r.errors.cols(); ++j) {
      const double v = r.errors(i, j);
      row.push_back(std::isnan(v) ? Json(nullptr) : Json(v));
    }
    errors.push_back(std::move(row));
  }
  return {{"method", r.method},
          {"restricted", r.restricted},
          {"horizon", r.horizon},
          {"initial_window", r.initial_window},
          {"rmsfe", r.rmsfe},
          {"maturities", r.maturities},
          {"origins", r.origins},
          {"errors", errors},
          {"selections", sel},
          {"excluded", r.excluded_count()},
          {"exclusion_reasons", r.exclusion_reasons}};
}

}  // namespace ffm

#endif  // FFM_IO_HPP
