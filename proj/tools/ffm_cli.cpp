// ffm: command-line front end to the functional factor model library.
//
// Every subcommand writes its outputs into --out (default ".") together with
// <subcommand>.manifest.json, which echoes the configuration, the seed, the
// library version and SHA-256 digests of the input files.

// Eigen first: the OpenSSL headers pulled in by httplib define macros that
// clash with Eigen's product kernels.
#include "ffm/ffm.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using ffm::Json;

namespace {

enum ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kData = 3,
  kNumeric = 4,
  kParse = 5,
  kNetwork = 6,
};

struct Common {
  std::string out = ".";
  std::string format = "csv";
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

struct Options {
  Common common;
  std::string input;
  std::string grid;  // "a,b,n", "native" or empty for the default
  std::string criterion = "bic";
  std::size_t k_max = 8;
  std::size_t p_max = 8;
  std::size_t horizon = 1;
  std::size_t window = ffm::kDefaultInitialWindow;
  double lambda = ffm::kDnsDefaultLambda;
  bool restricted = false;
  std::string model = "M1";
  std::size_t length = 500;
  std::size_t reps = 1000;
  std::optional<std::size_t> fixed_k;
  std::optional<std::size_t> fixed_p;
  std::string method = "ffm";
  std::string model_file;
  std::string output;
  std::string from_file;
  bool offline = false;
};

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ffm::DataError("cannot open '" + path + "'");
  }
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

class Run {
 public:
  Run(std::string command, const Options& o, Json config)
      : command_(std::move(command)), opts_(o) {
    fs::create_directories(o.common.out);
    manifest_ = {{"tool", "ffm"},
                 {"version", FFM_VERSION},
                 {"command", command_},
                 {"seed", o.common.seed},
                 {"config", std::move(config)},
                 {"inputs", Json::array()},
                 {"outputs", Json::array()},
                 {"results", Json::object()}};
  }

  void input(const std::string& path) {
    manifest_["inputs"].push_back({{"path", path}, {"sha256", sha256_file(path)}});
  }

  std::ofstream open(const std::string& name) {
    const fs::path path = fs::path(opts_.common.out) / name;
    std::ofstream out(path);
    if (!out) {
      throw ffm::DataError("cannot write '" + path.string() + "'");
    }
    out << std::setprecision(17);
    manifest_["outputs"].push_back(path.string());
    return out;
  }

  void json(const std::string& name, const Json& doc) { open(name) << doc.dump(2) << '\n'; }

  Json& results() { return manifest_["results"]; }

  void finish() {
    const fs::path path = fs::path(opts_.common.out) / (command_ + ".manifest.json");
    std::ofstream(path) << manifest_.dump(2) << '\n';
  }

 private:
  std::string command_;
  const Options& opts_;
  Json manifest_;
};

Json common_config(const Options& o) {
  return {{"out", o.common.out}, {"format", o.common.format}, {"jobs", o.common.jobs}};
}

std::optional<ffm::Grid> parse_grid(const std::string& spec) {
  if (spec.empty() || spec == "native") {
    return std::nullopt;
  }
  const auto parts = ffm::csv::split(spec);
  if (parts.size() != 3) {
    throw ffm::ConfigError("--grid expects a,b,n (got '" + spec + "')");
  }
  try {
    const double a = std::stod(parts[0]);
    const double b = std::stod(parts[1]);
    const long n = std::stol(parts[2]);
    if (n < 2) {
      throw ffm::ConfigError("--grid needs n >= 2");
    }
    return ffm::make_grid(a, b, static_cast<std::size_t>(n));
  } catch (const std::logic_error&) {
    throw ffm::ConfigError("--grid expects numbers a,b,n (got '" + spec + "')");
  }
}

struct Ingested {
  ffm::DiscretePanel panel;
  ffm::FunctionalSample sample;
  std::vector<ffm::RowKnots> knots;
};

// Panel -> sample.  "native" keeps the maturities as the grid; the default is
// kDefaultGridSize uniform points over the maturity range.
Ingested ingest(const Options& o, Run& run) {
  run.input(o.input);
  ffm::DiscretePanel panel = ffm::read_panel_file(o.input);
  std::vector<ffm::RowKnots> knots;
  if (o.grid == "native") {
    ffm::FunctionalSample sample = ffm::panel_as_sample(panel);
    return {std::move(panel), std::move(sample), {}};
  }
  const ffm::Grid grid = parse_grid(o.grid).value_or(ffm::make_grid(
      panel.maturities().front(), panel.maturities().back(), ffm::kDefaultGridSize));
  ffm::FunctionalSample sample = ffm::panel_to_sample(panel, grid, &knots);
  return {std::move(panel), std::move(sample), std::move(knots)};
}

void write_provenance(Run& run, const Ingested& data) {
  Json rows = Json::array();
  for (const auto& k : data.knots) {
    if (k.missing > 0) {
      rows.push_back({{"row", k.row},
                      {"time", data.panel.times()[k.row]},
                      {"knots", k.maturities},
                      {"missing", k.missing}});
    }
  }
  if (!rows.empty()) {
    run.json("provenance.json", {{"spline", "natural cubic through observed maturities"},
                                 {"rows", rows}});
    run.results()["rows_with_missing_cells"] = rows.size();
  }
}

void write_fpca(Run& run, const ffm::FpcaResult& r, const std::string& format) {
  if (format == "json") {
    run.json("fpca.json", ffm::fpca_to_json(r));
    return;
  }
  {
    auto out = run.open("fpca_eigenvalues.csv");
    out << "l,eigenvalue\n";
    for (Eigen::Index l = 0; l < r.eigenvalues().size(); ++l) {
      out << l + 1 << ',' << ffm::csv::format(r.eigenvalues()(l)) << '\n';
    }
  }
  {
    auto out = run.open("fpca_eigenfunctions.csv");
    out << "r,mean";
    for (std::size_t l = 0; l < r.components(); ++l) {
      out << ",psi" << l + 1;
    }
    out << '\n';
    for (std::size_t i = 0; i < r.grid().size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      out << ffm::csv::format(r.grid().points()[i]) << ',' << ffm::csv::format(r.mean()(ii));
      for (std::size_t l = 0; l < r.components(); ++l) {
        out << ',' << ffm::csv::format(r.eigenfunctions()(ii, static_cast<Eigen::Index>(l)));
      }
      out << '\n';
    }
  }
  std::vector<std::string> header;
  for (std::size_t l = 0; l < r.components(); ++l) {
    header.push_back("score" + std::to_string(l + 1));
  }
  auto out = run.open("fpca_scores.csv");
  ffm::write_matrix_csv(out, r.scores(), header);
}

ffm::FfmConfig ffm_config(const Options& o) {
  ffm::FfmConfig c;
  c.criterion = ffm::parse_criterion(o.criterion);
  c.k_max = o.k_max;
  c.p_max = o.p_max;
  c.restricted = o.restricted;
  if (o.fixed_k || o.fixed_p) {
    if (!o.fixed_k || !o.fixed_p) {
      throw ffm::ConfigError("--K and --p must be given together");
    }
    c.fixed = ffm::Selection{*o.fixed_k, *o.fixed_p};
  }
  return c;
}

void write_forecast(Run& run, const ffm::ForecastResult& fc, const std::string& format) {
  if (format == "json") {
    run.json("forecast.json", {{"grid", ffm::grid_to_json(fc.grid)},
                               {"curves", ffm::detail::matrix_rows(fc.curves)},
                               {"scores", ffm::detail::matrix_rows(fc.score_forecasts)}});
  } else {
    auto out = run.open("forecast.csv");
    ffm::write_forecast_csv(out, fc);
  }
}

// ---------------------------------------------------------------------------

int cmd_fpca(const Options& o) {
  Json cfg = common_config(o);
  cfg.update({{"input", o.input}, {"grid", o.grid}, {"k_max", o.k_max}});
  Run run("fpca", o, cfg);
  const Ingested data = ingest(o, run);
  write_provenance(run, data);
  const ffm::FpcaResult r = ffm::fpca(data.sample, o.k_max);
  write_fpca(run, r, o.common.format);
  run.results()["rank"] = r.rank();
  run.results()["components"] = r.components();
  run.results()["total_variance"] = r.total_variance();
  run.finish();
  return kOk;
}

int cmd_select(const Options& o) {
  Json cfg = common_config(o);
  cfg.update({{"input", o.input},
              {"grid", o.grid},
              {"criterion", o.criterion},
              {"k_max", o.k_max},
              {"p_max", o.p_max},
              {"restricted", o.restricted}});
  Run run("select", o, cfg);
  const Ingested data = ingest(o, run);
  write_provenance(run, data);
  ffm::FfmConfig config = ffm_config(o);
  config.fixed.reset();
  const ffm::FfmModel model = ffm::fit_ffm(data.sample, config);
  const ffm::SelectionGrid& grid = *model.selection();
  if (o.common.format == "json") {
    run.json("selection.json", ffm::selection_to_json(grid));
  } else {
    auto out = run.open("surface.csv");
    ffm::write_surface_csv(out, grid);
  }
  run.json("model.json", ffm::model_to_json(model));
  run.results()["K"] = model.factors();
  run.results()["p"] = model.lags();
  for (ffm::Criterion c : ffm::kAllCriteria) {
    const ffm::Selection s = grid.chosen(c);
    run.results()["chosen"][std::string(ffm::to_string(c))] = {{"K", s.factors}, {"p", s.lags}};
  }
  run.results()["warnings"] = model.warnings();
  for (const auto& w : model.warnings()) {
    std::cerr << "warning: " << w << '\n';
  }
  run.finish();
  return kOk;
}

int cmd_forecast(const Options& o) {
  Json cfg = common_config(o);
  cfg.update({{"input", o.input},
              {"model_file", o.model_file},
              {"grid", o.grid},
              {"criterion", o.criterion},
              {"k_max", o.k_max},
              {"p_max", o.p_max},
              {"restricted", o.restricted},
              {"horizon", o.horizon}});
  if (o.fixed_k) cfg["K"] = *o.fixed_k;
  if (o.fixed_p) cfg["p"] = *o.fixed_p;
  Run run("forecast", o, cfg);
  if (o.input.empty() == o.model_file.empty()) {
    throw ffm::ConfigError("forecast needs exactly one of --input or --model-file");
  }
  std::optional<ffm::FfmModel> model;
  if (!o.model_file.empty()) {
    run.input(o.model_file);
    model = ffm::model_from_json(ffm::read_json_file(o.model_file));
  } else {
    const Ingested data = ingest(o, run);
    write_provenance(run, data);
    model = ffm::fit_ffm(data.sample, ffm_config(o));
    run.json("model.json", ffm::model_to_json(*model));
  }
  write_forecast(run, ffm::forecast(*model, o.horizon), o.common.format);
  run.results()["K"] = model->factors();
  run.results()["p"] = model->lags();
  run.finish();
  return kOk;
}

int cmd_simulate(const Options& o) {
  Json cfg = common_config(o);
  cfg.update({{"model", o.model}, {"T", o.length}, {"grid", o.grid}, {"burn_in", ffm::kDefaultBurnIn}});
  Run run("simulate", o, cfg);
  ffm::SimSpec spec;
  spec.model = ffm::model_by_name(o.model);
  spec.length = o.length;
  spec.seed = o.common.seed;
  if (auto g = parse_grid(o.grid)) {
    spec.grid = *g;
  }
  const ffm::Simulation sim = ffm::simulate_detailed(spec);
  auto out = run.open("sample.csv");
  ffm::write_sample(out, sim.sample);
  std::vector<std::string> header;
  for (std::size_t k = 0; k < spec.model.factors(); ++k) {
    header.push_back("F" + std::to_string(k + 1));
  }
  auto factors = run.open("factors.csv");
  ffm::write_matrix_csv(factors, sim.factors, header);
  run.results()["K"] = spec.model.factors();
  run.results()["p"] = spec.model.order();
  run.finish();
  return kOk;
}

int cmd_mc(const Options& o) {
  Json cfg = common_config(o);
  cfg.update({{"model", o.model},
              {"T", o.length},
              {"reps", o.reps},
              {"k_max", o.k_max},
              {"p_max", o.p_max},
              {"grid", o.grid},
              {"restricted", o.restricted},
              {"burn_in", ffm::kDefaultBurnIn}});
  Run run("mc", o, cfg);
  ffm::SimSpec spec;
  spec.model = ffm::model_by_name(o.model);
  spec.length = o.length;
  spec.seed = o.common.seed;
  if (auto g = parse_grid(o.grid)) {
    spec.grid = *g;
  }
  ffm::McOptions mo;
  mo.replications = o.reps;
  mo.k_max = o.k_max;
  mo.p_max = o.p_max;
  mo.restricted = o.restricted;
  mo.jobs = o.common.jobs;
  const ffm::McReport report = ffm::monte_carlo(spec, mo);
  {
    auto out = run.open("mc.csv");
    ffm::write_mc_csv(out, {report});
  }
  Json freq = Json::object();
  for (const auto& s : report.criteria) {
    const std::string name(ffm::to_string(s.criterion));
    freq[name] = ffm::detail::matrix_rows(s.frequencies);
    run.results()[name] = {{"bias_K", s.factors.bias},
                           {"bias_p", s.lags.bias},
                           {"rmse_K", s.factors.rmse},
                           {"rmse_p", s.lags.rmse},
                           {"hit_rate", s.hit_rate}};
  }
  run.json("mc_frequencies.json", freq);
  run.finish();
  return kOk;
}

ffm::BacktestMethod parse_method(const std::string& m) {
  if (m == "ffm") return ffm::BacktestMethod::FfmFixed;
  if (m == "ffm-criterion") return ffm::BacktestMethod::FfmCriterion;
  if (m == "dns") return ffm::BacktestMethod::Dns;
  throw ffm::ConfigError("unknown --method '" + m + "' (expected ffm, ffm-criterion or dns)");
}

int cmd_backtest(const Options& o) {
  Json cfg = common_config(o);
  cfg.update({{"input", o.input},
              {"grid", o.grid},
              {"method", o.method},
              {"criterion", o.criterion},
              {"k_max", o.k_max},
              {"p_max", o.p_max},
              {"restricted", o.restricted},
              {"horizon", o.horizon},
              {"window", o.window},
              {"lambda", o.lambda}});
  if (o.fixed_k) cfg["K"] = *o.fixed_k;
  if (o.fixed_p) cfg["p"] = *o.fixed_p;
  Run run("backtest", o, cfg);
  ffm::BacktestOptions bo;
  bo.method = parse_method(o.method);
  bo.criterion = ffm::parse_criterion(o.criterion);
  bo.k_max = o.k_max;
  bo.p_max = o.p_max;
  bo.restricted = o.restricted;
  bo.lambda = o.lambda;
  bo.horizon = o.horizon;
  bo.initial_window = o.window;
  bo.jobs = o.common.jobs;
  if (bo.method == ffm::BacktestMethod::FfmFixed) {
    if (!o.fixed_k || !o.fixed_p) {
      throw ffm::ConfigError("--method ffm needs --K and --p");
    }
    bo.fixed = {*o.fixed_k, *o.fixed_p};
  }
  const Ingested data = ingest(o, run);
  write_provenance(run, data);
  const ffm::BacktestReport report = ffm::rolling_backtest(data.panel, data.sample.grid(), bo);
  {
    auto out = run.open("backtest.csv");
    ffm::write_backtest_csv(out, {{report, bo}});
  }
  run.json("backtest_errors.json", ffm::backtest_to_json(report));
  run.results()["rmsfe"] = report.rmsfe;
  run.results()["origins"] = report.origins.size();
  run.results()["excluded"] = report.excluded_count();
  run.finish();
  return kOk;
}

int cmd_dns(const Options& o) {
  Json cfg = common_config(o);
  cfg.update({{"input", o.input}, {"lambda", o.lambda}, {"restricted", o.restricted}, {"horizon", o.horizon}});
  Run run("dns", o, cfg);
  run.input(o.input);
  const ffm::DiscretePanel panel = ffm::read_panel_file(o.input);
  const ffm::DnsModel model = ffm::fit_dns(panel, o.lambda, o.restricted);
  run.json("dns.json", ffm::dns_to_json(model));
  const ffm::Matrix fc = ffm::dns_forecast(model, panel.maturities(), o.horizon);
  auto out = run.open("dns_forecast.csv");
  out << "horizon,r,value\n";
  for (Eigen::Index k = 0; k < fc.rows(); ++k) {
    for (std::size_t i = 0; i < panel.maturities().size(); ++i) {
      out << k + 1 << ',' << ffm::csv::format(panel.maturities()[i]) << ','
          << ffm::csv::format(fc(k, static_cast<Eigen::Index>(i))) << '\n';
    }
  }
  run.results()["companion_radius"] = ffm::companion_spectral_radius(model.dynamics());
  run.finish();
  return kOk;
}

int cmd_fetch_h15(const Options& o) {
  Json cfg = common_config(o);
  cfg.update({{"output", o.output}, {"from_file", o.from_file}, {"offline", o.offline}});
  Run run("fetch-h15", o, cfg);
  std::string body;
  if (!o.from_file.empty()) {
    run.input(o.from_file);
    std::ifstream in(o.from_file);
    if (!in) {
      throw ffm::DataError("cannot open '" + o.from_file + "'");
    }
    body.assign(std::istreambuf_iterator<char>(in), {});
  } else {
    if (o.offline || std::getenv("FFM_OFFLINE") != nullptr) {
      throw ffm::NetworkError("network required: fetch-h15 downloads from " +
                              std::string(ffm::kH15Host) +
                              " (use --from-file for a saved download)");
    }
    httplib::Client client{std::string(ffm::kH15Host)};
    client.set_follow_location(true);
    client.set_connection_timeout(20);
    client.set_read_timeout(60);
    const auto res = client.Get(ffm::h15_path());
    if (!res) {
      throw ffm::NetworkError("network required: request to " + std::string(ffm::kH15Host) +
                              " failed (" + httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) {
      throw ffm::NetworkError("H.15 download returned HTTP " + std::to_string(res->status));
    }
    body = res->body;
    run.results()["url"] = std::string(ffm::kH15Host) + ffm::h15_path();
  }
  std::istringstream in(body);
  const ffm::DiscretePanel panel = ffm::parse_h15(in);
  if (o.output.empty()) {
    throw ffm::ConfigError("fetch-h15 needs --output");
  }
  std::ofstream out(o.output);
  if (!out) {
    throw ffm::DataError("cannot write '" + o.output + "'");
  }
  ffm::write_long_panel(out, panel);
  std::size_t missing = 0;
  for (Eigen::Index t = 0; t < panel.table().rows(); ++t) {
    for (Eigen::Index j = 0; j < panel.table().cols(); ++j) {
      missing += std::isnan(panel.table()(t, j)) ? 1 : 0;
    }
  }
  run.results()["rows"] = panel.length();
  run.results()["maturities"] = panel.maturities();
  run.results()["missing_cells"] = missing;
  run.finish();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional factor models for curve time series"};
  app.set_version_flag("--version", std::string(FFM_VERSION));
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.common.out, "Output directory")->capture_default_str();
    sub->add_option("--format", o.common.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_option("--jobs", o.common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto add_input = [&](CLI::App* sub, bool required = true) {
    auto* opt = sub->add_option("--input", o.input, "Panel CSV (wide or long layout)");
    if (required) opt->required();
    sub->add_option("--grid", o.grid, "Evaluation grid a,b,n or 'native'");
  };
  auto add_selection = [&](CLI::App* sub) {
    sub->add_option("--criterion", o.criterion, "bic, hqc or ffpe")
        ->check(CLI::IsMember({"bic", "hqc", "ffpe"}))
        ->capture_default_str();
    sub->add_option("--kmax", o.k_max, "Largest number of factors")->check(CLI::PositiveNumber);
    sub->add_option("--pmax", o.p_max, "Largest VAR order")->check(CLI::PositiveNumber);
    sub->add_flag("--restricted", o.restricted, "Diagonal AR dynamics instead of a full VAR");
  };
  auto add_fixed = [&](CLI::App* sub) {
    sub->add_option("--K", o.fixed_k, "Fixed number of factors")->check(CLI::PositiveNumber);
    sub->add_option("--p", o.fixed_p, "Fixed VAR order")->check(CLI::PositiveNumber);
  };

  auto* fpca_cmd = app.add_subcommand("fpca", "Functional principal components of a panel");
  add_common(fpca_cmd);
  add_input(fpca_cmd);
  fpca_cmd->add_option("--kmax", o.k_max, "Components to keep")->check(CLI::PositiveNumber);

  auto* select_cmd = app.add_subcommand("select", "Choose (K, p) by information criterion");
  add_common(select_cmd);
  add_input(select_cmd);
  add_selection(select_cmd);

  auto* forecast_cmd = app.add_subcommand("forecast", "Forecast curves h steps ahead");
  add_common(forecast_cmd);
  add_input(forecast_cmd, false);
  add_selection(forecast_cmd);
  add_fixed(forecast_cmd);
  forecast_cmd->add_option("--model-file", o.model_file, "model.json written by select");
  forecast_cmd->add_option("--horizon", o.horizon, "Forecast horizon")->check(CLI::PositiveNumber);

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a curve panel from M1-M4");
  add_common(simulate_cmd);
  simulate_cmd->add_option("--model", o.model, "M1, M2, M3 or M4")->capture_default_str();
  simulate_cmd->add_option("--T", o.length, "Sample length")->check(CLI::Range(2, 1000000));
  simulate_cmd->add_option("--seed", o.common.seed, "Random seed")->capture_default_str();
  simulate_cmd->add_option("--grid", o.grid, "Simulation grid a,b,n (default 0,1,51)");

  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo study of the (K, p) estimators");
  add_common(mc_cmd);
  mc_cmd->add_option("--model", o.model, "M1, M2, M3 or M4")->capture_default_str();
  mc_cmd->add_option("--T", o.length, "Sample length")->check(CLI::Range(2, 1000000));
  mc_cmd->add_option("--reps", o.reps, "Replications")->check(CLI::PositiveNumber);
  mc_cmd->add_option("--seed", o.common.seed, "Master seed")->capture_default_str();
  mc_cmd->add_option("--grid", o.grid, "Simulation grid a,b,n (default 0,1,51)");
  mc_cmd->add_option("--kmax", o.k_max, "Largest number of factors")->check(CLI::PositiveNumber);
  mc_cmd->add_option("--pmax", o.p_max, "Largest VAR order")->check(CLI::PositiveNumber);
  mc_cmd->add_flag("--restricted", o.restricted, "Diagonal AR dynamics");

  auto* backtest_cmd = app.add_subcommand("backtest", "Expanding-window out-of-sample RMSFE");
  add_common(backtest_cmd);
  add_input(backtest_cmd);
  add_selection(backtest_cmd);
  add_fixed(backtest_cmd);
  backtest_cmd->add_option("--method", o.method, "ffm, ffm-criterion or dns")->capture_default_str();
  backtest_cmd->add_option("--horizon", o.horizon, "Forecast horizon")->check(CLI::PositiveNumber);
  backtest_cmd->add_option("--window", o.window, "Initial estimation window")->capture_default_str();
  backtest_cmd->add_option("--lambda", o.lambda, "DNS decay")->capture_default_str();

  auto* dns_cmd = app.add_subcommand("dns", "Dynamic Nelson-Siegel fit and forecast");
  add_common(dns_cmd);
  dns_cmd->add_option("--input", o.input, "Panel CSV")->required();
  dns_cmd->add_option("--lambda", o.lambda, "Decay parameter")->capture_default_str();
  dns_cmd->add_flag("--restricted", o.restricted, "Diagonal AR(1) factor dynamics");
  dns_cmd->add_option("--horizon", o.horizon, "Forecast horizon")->check(CLI::PositiveNumber);

  auto* fetch_cmd = app.add_subcommand("fetch-h15", "Download H.15 Treasury yields as a long panel");
  add_common(fetch_cmd);
  fetch_cmd->add_option("--output", o.output, "Long-layout panel CSV to write")->required();
  fetch_cmd->add_option("--from-file", o.from_file, "Parse a saved H.15 download instead");
  fetch_cmd->add_flag("--offline", o.offline, "Refuse network access");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*fpca_cmd) return cmd_fpca(o);
    if (*select_cmd) return cmd_select(o);
    if (*forecast_cmd) return cmd_forecast(o);
    if (*simulate_cmd) return cmd_simulate(o);
    if (*mc_cmd) return cmd_mc(o);
    if (*backtest_cmd) return cmd_backtest(o);
    if (*dns_cmd) return cmd_dns(o);
    if (*fetch_cmd) return cmd_fetch_h15(o);
  } catch (const ffm::NetworkError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNetwork;
  } catch (const ffm::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const ffm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ffm::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const ffm::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const Json::exception& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  }
  return kConfig;
}
