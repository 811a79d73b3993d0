#ifndef FFM_H15_HPP
#define FFM_H15_HPP

/** @file
 * Federal Reserve H.15 constant-maturity Treasury yields.
 *
 * The data-download CSV carries a few metadata rows, then a `Time Period`
 * header naming one series per column.  Missing observations are written
 * as `ND` and stay missing here.
 */

#include "ffm/core.hpp"
#include "ffm/io.hpp"

#include <array>
#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ffm {

class NetworkError : public Error {
 public:
  using Error::Error;
};

/// Series identifier and maturity in months.
inline constexpr std::array<std::pair<std::string_view, double>, 11> kH15Series{{
    {"RIFLGFCM01_N.M", 1},
    {"RIFLGFCM03_N.M", 3},
    {"RIFLGFCM06_N.M", 6},
    {"RIFLGFCY01_N.M", 12},
    {"RIFLGFCY02_N.M", 24},
    {"RIFLGFCY03_N.M", 36},
    {"RIFLGFCY05_N.M", 60},
    {"RIFLGFCY07_N.M", 84},
    {"RIFLGFCY10_N.M", 120},
    {"RIFLGFCY20_N.M", 240},
    {"RIFLGFCY30_N.M", 360},
}};

inline constexpr std::string_view kH15Host = "https://www.federalreserve.gov";

inline std::string h15_path() {
  std::string series;
  for (const auto& [id, maturity] : kH15Series) {
    series += series.empty() ? "" : ",";
    series += id;
  }
  return "/datadownload/Output.aspx?rel=H15&series=" + series +
         "&lastobs=&from=&to=&filetype=csv&label=include&layout=seriescolumn";
}

/// Parses the download CSV into a panel with maturities in months.  The
/// header must name exactly the eleven expected series, in any order.
inline DiscretePanel parse_h15(std::istream& in) {
  const auto rows = csv::read_rows(in);
  std::size_t header_row = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].second.empty() && rows[i].second.front() == "Time Period") {
      header_row = i;
      break;
    }
  }
  if (header_row == rows.size()) {
    throw ParseError("H.15: no `Time Period` header row found");
  }
  const auto& [header_line, header] = rows[header_row];
  if (header.size() != kH15Series.size() + 1) {
    throw ParseError(detail::concat("line ", header_line, ": H.15 header has ", header.size() - 1,
                                    " series, expected ", kH15Series.size()));
  }
  // column index in the file for each expected series
  std::vector<std::size_t> column(kH15Series.size(), 0);
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string id = header[c];
    if (const auto slash = id.rfind('/'); slash != std::string::npos) {
      id = id.substr(slash + 1);
    }
    std::size_t k = 0;
    while (k < kH15Series.size() && kH15Series[k].first != id) {
      ++k;
    }
    if (k == kH15Series.size()) {
      throw ParseError(detail::concat("line ", header_line, ", column ", c + 1,
                                      ": unexpected H.15 series '", header[c], "'"));
    }
    if (column[k] != 0) {
      throw ParseError(detail::concat("line ", header_line, ", column ", c + 1,
                                      ": duplicate H.15 series '", header[c], "'"));
    }
    column[k] = c;
  }
  std::vector<double> maturities;
  for (const auto& [id, maturity] : kH15Series) {
    maturities.push_back(maturity);
  }
  const std::size_t t_len = rows.size() - header_row - 1;
  if (t_len == 0) {
    throw DataError("H.15: no observations after the header");
  }
  Matrix table(static_cast<Eigen::Index>(t_len), static_cast<Eigen::Index>(kH15Series.size()));
  std::vector<std::string> times;
  for (std::size_t r = 0; r < t_len; ++r) {
    const auto& [line, fields] = rows[header_row + 1 + r];
    if (fields.size() != header.size()) {
      throw ParseError(detail::concat("line ", line, ": expected ", header.size(), " fields, got ",
                                      fields.size()));
    }
    times.push_back(fields[0]);
    for (std::size_t k = 0; k < kH15Series.size(); ++k) {
      const std::string& cell = fields[column[k]];
      table(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
          csv::is_missing_token(cell) ? kMissing : csv::parse_number(cell, line, column[k] + 1);
    }
  }
  return DiscretePanel(std::move(maturities), std::move(table), std::move(times));
}

}  // namespace ffm

#endif  // FFM_H15_HPP
