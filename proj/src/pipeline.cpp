#include "gtv/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "gtv/errors.hpp"
#include "gtv/version.hpp"

namespace gtv {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---- csv helpers -----------------------------------------------------------

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(',', start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.remove_suffix(1);
  }
  return out;
}

double parse_double(std::string_view f, std::size_t line, const char* column) {
  double v = 0.0;
  const char* end = f.data() + f.size();
  auto [ptr, ec] = std::from_chars(f.data(), end, v);
  if (ec != std::errc() || ptr != end || f.empty() || !std::isfinite(v))
    throw ParseError(std::string("invalid number '") + std::string(f) + "' in column " + column, line);
  return v;
}

std::int64_t parse_int(std::string_view f, std::size_t line, const char* column) {
  std::int64_t v = 0;
  const char* end = f.data() + f.size();
  auto [ptr, ec] = std::from_chars(f.data(), end, v);
  if (ec != std::errc() || ptr != end || f.empty())
    throw ParseError(std::string("invalid integer '") + std::string(f) + "' in column " + column, line);
  return v;
}

// Calls row(fields, line) for every non-empty data line after the header.
template <class Row>
void read_csv(const fs::path& path, const std::string& header, std::size_t n_cols, Row&& row) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string text;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (!seen_header) {
      if (text != header) throw ParseError("expected header '" + header + "', got '" + text + "'", line_no);
      seen_header = true;
      continue;
    }
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split(text);
    if (fields.size() != n_cols)
      throw ParseError("expected " + std::to_string(n_cols) + " fields, got " + std::to_string(fields.size()),
                       line_no);
    row(fields, line_no);
  }
  if (!seen_header) throw ParseError("missing header '" + header + "'", 1);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string iso_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- json helpers ----------------------------------------------------------

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigurationError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigurationError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  out = j.at(key).get<T>();
}

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

// ---- data files --------------------------------------------------------------

ScatterData load_scatter_csv(const fs::path& path) {
  ScatterData data;
  std::vector<double> values;
  read_csv(path, "lon_deg,lat_deg,value", 3, [&](const auto& f, std::size_t line) {
    const double lon = parse_double(f[0], line, "lon_deg");
    const double lat = parse_double(f[1], line, "lat_deg");
    const double v = parse_double(f[2], line, "value");
    if (lat < -90.0 || lat > 90.0)
      throw InputError("line " + std::to_string(line) + ": latitude " + fmt17(lat) + " outside [-90, 90]");
    data.directions.push_back(Direction::from_lonlat(lon, lat));
    values.push_back(v);
  });
  data.values = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return data;
}

void save_scatter_csv(const fs::path& path, const ScatterData& data) {
  if (static_cast<Eigen::Index>(data.directions.size()) != data.values.size())
    throw InputError("save_scatter_csv: directions and values differ in length");
  std::string out = "lon_deg,lat_deg,value\n";
  for (std::size_t i = 0; i < data.directions.size(); ++i)
    out += fmt17(data.directions[i].lon_deg()) + "," + fmt17(data.directions[i].lat_deg()) + "," +
           fmt17(data.values[static_cast<Eigen::Index>(i)]) + "\n";
  write_text(path, out);
}

PatchCounts load_patch_counts_csv(const fs::path& path) {
  PatchCounts data;
  read_csv(path, "lon_min,lon_max,lat_min,lat_max,count", 5, [&](const auto& f, std::size_t line) {
    const double lon_min = parse_double(f[0], line, "lon_min");
    const double lon_max = parse_double(f[1], line, "lon_max");
    const double lat_min = parse_double(f[2], line, "lat_min");
    const double lat_max = parse_double(f[3], line, "lat_max");
    const std::int64_t count = parse_int(f[4], line, "count");
    if (count < 0) throw InputError("line " + std::to_string(line) + ": negative count " + std::to_string(count));
    try {
      data.patches.emplace_back(lon_min, lon_max, lat_min, lat_max);
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(line) + ": " + e.what());
    }
    data.counts.push_back(count);
  });
  return data;
}

void save_patch_counts_csv(const fs::path& path, const PatchCounts& data) {
  if (data.patches.size() != data.counts.size()) throw InputError("save_patch_counts_csv: length mismatch");
  std::string out = "lon_min,lon_max,lat_min,lat_max,count\n";
  for (std::size_t i = 0; i < data.patches.size(); ++i) {
    const auto& b = data.patches[i];
    out += fmt17(b.lon_min) + "," + fmt17(b.lon_max) + "," + fmt17(b.lat_min) + "," + fmt17(b.lat_max) + "," +
           std::to_string(data.counts[i]) + "\n";
  }
  write_text(path, out);
}

void save_coefficients_csv(const fs::path& path, const SplineField& field) {
  std::string out = "index,lon_deg,lat_deg,coeff\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto& r = field.knots()[i];
    out += std::to_string(i) + "," + fmt17(r.lon_deg()) + "," + fmt17(r.lat_deg()) + "," +
           fmt17(field.coeffs()[static_cast<Eigen::Index>(i)]) + "\n";
  }
  write_text(path, out);
}

std::pair<KnotSet, Eigen::VectorXd> load_coefficients_csv(const fs::path& path) {
  std::vector<Direction> knots;
  std::vector<double> coeffs;
  read_csv(path, "index,lon_deg,lat_deg,coeff", 4, [&](const auto& f, std::size_t line) {
    const auto idx = parse_int(f[0], line, "index");
    if (idx != static_cast<std::int64_t>(knots.size()))
      throw ParseError("indices must run 0, 1, 2, ... in order", line);
    const double lat = parse_double(f[2], line, "lat_deg");
    if (lat < -90.0 || lat > 90.0) throw InputError("line " + std::to_string(line) + ": latitude outside [-90, 90]");
    knots.push_back(Direction::from_lonlat(parse_double(f[1], line, "lon_deg"), lat));
    coeffs.push_back(parse_double(f[3], line, "coeff"));
  });
  Eigen::VectorXd c = Eigen::Map<Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  return {KnotSet(std::move(knots)), std::move(c)};
}

void export_raster(const SplineField& field, int n_lat, int n_lon, const fs::path& path) {
  if (n_lat < 2 || n_lon < 2) throw InputError("export_raster: grid must be at least 2 x 2");
  std::vector<Direction> targets;
  std::vector<std::pair<double, double>> lonlat;
  targets.reserve(static_cast<std::size_t>(n_lat) * n_lon);
  for (int i = 0; i < n_lat; ++i) {
    const double lat = -90.0 + (i + 0.5) * 180.0 / n_lat;
    for (int j = 0; j < n_lon; ++j) {
      const double lon = -180.0 + (j + 0.5) * 360.0 / n_lon;
      targets.push_back(Direction::from_lonlat(lon, lat));
      lonlat.emplace_back(lon, lat);
    }
  }
  const Eigen::VectorXd v = evaluate(field, targets);
  std::string out = "lon_deg,lat_deg,value\n";
  out.reserve(out.size() + targets.size() * 48);
  char buf[96];
  for (std::size_t i = 0; i < targets.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", lonlat[i].first, lonlat[i].second,
                  v[static_cast<Eigen::Index>(i)]);
    out += buf;
  }
  write_text(path, out);
}

// ---- synthetic data ------------------------------------------------------------

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<Direction> random_directions(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Direction> out;
  out.reserve(n);
  while (out.size() < n) {
    const double x = normal(rng), y = normal(rng), z = normal(rng);
    if (x * x + y * y + z * z < 1e-20) continue;
    out.emplace_back(x, y, z);
  }
  return out;
}

namespace {

Eigen::VectorXd uniform_amplitudes(std::size_t k, double amp_min, double amp_max, std::uint64_t seed) {
  if (!(amp_min <= amp_max)) throw InputError("amplitude range must satisfy min <= max");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(amp_min, amp_max);
  Eigen::VectorXd a(static_cast<Eigen::Index>(k));
  for (auto& v : a) v = amp_min == amp_max ? amp_min : u(rng);
  return a;
}

}  // namespace

SplineField plant_spline(const ZonalKernel& kernel, std::size_t k, double amp_min, double amp_max,
                         std::uint64_t seed) {
  if (k < 1) throw InputError("plant_spline: need at least one knot");
  KnotSet knots(random_directions(k, derive_seed(seed, 0)));
  return synthesize(kernel, std::move(knots), uniform_amplitudes(k, amp_min, amp_max, derive_seed(seed, 1)));
}

SplineField plant_on_knots(const ZonalKernel& kernel, const KnotSet& knots, std::size_t k, double amp_min,
                           double amp_max, std::uint64_t seed) {
  if (k < 1 || k > knots.size()) throw InputError("plant_on_knots: need 1 <= K <= number of knots");
  std::vector<std::size_t> order(knots.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::shuffle(order.begin(), order.end(), rng);
  const Eigen::VectorXd a = uniform_amplitudes(k, amp_min, amp_max, derive_seed(seed, 1));
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(knots.size()));
  for (std::size_t i = 0; i < k; ++i) c[static_cast<Eigen::Index>(order[i])] = a[static_cast<Eigen::Index>(i)];
  return synthesize(kernel, knots, std::move(c));
}

Eigen::VectorXd add_gaussian_noise(const Eigen::VectorXd& values, double psnr_db, std::uint64_t seed) {
  if (values.size() == 0) throw InputError("add_gaussian_noise: no values");
  const double peak = values.cwiseAbs().maxCoeff();
  if (peak == 0.0) throw InputError("add_gaussian_noise: PSNR is undefined for an all-zero signal");
  const double s = peak * std::pow(10.0, -psnr_db / 20.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd out = values;
  for (auto& v : out) v += s * normal(rng);
  return out;
}

std::vector<std::int64_t> poisson_counts(const Eigen::VectorXd& rates, std::uint64_t seed) {
  if ((rates.array() < 0.0).any() || !rates.allFinite())
    throw InputError("poisson_counts: rates must be finite and nonnegative");
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> out(static_cast<std::size_t>(rates.size()), 0);
  for (Eigen::Index i = 0; i < rates.size(); ++i) {
    if (rates[i] == 0.0) continue;
    std::poisson_distribution<std::int64_t> p(rates[i]);
    out[static_cast<std::size_t>(i)] = p(rng);
  }
  return out;
}

// ---- config ----------------------------------------------------------------------

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    check_keys(j, {"kernel", "knots", "sampling", "cost", "solver", "seed", "outputs", "lambda_sweep"}, "config");
    if (j.contains("kernel")) {
      const auto& k = j.at("kernel");
      check_keys(k, {"family", "beta", "d", "k", "epsilon", "fwhm_deg", "convention", "green_tolerance"}, "kernel");
      read(k, "family", c.kernel.family);
      read(k, "beta", c.kernel.beta);
      read(k, "d", c.kernel.d);
      read(k, "k", c.kernel.k);
      read(k, "epsilon", c.kernel.epsilon);
      read(k, "fwhm_deg", c.kernel.fwhm_deg);
      read(k, "convention", c.kernel.convention);
      read(k, "green_tolerance", c.kernel.green_tolerance);
    }
    if (j.contains("knots")) {
      check_keys(j.at("knots"), {"fibonacci"}, "knots");
      read(j.at("knots"), "fibonacci", c.n_knots);
    }
    if (j.contains("sampling")) {
      const auto& s = j.at("sampling");
      check_keys(s, {"scatter_csv", "patch_csv", "synthetic", "patch_quadrature", "abs_cutoff"}, "sampling");
      read(s, "scatter_csv", c.sampling.scatter_csv);
      read(s, "patch_csv", c.sampling.patch_csv);
      read(s, "patch_quadrature", c.sampling.patch_quadrature);
      read(s, "abs_cutoff", c.sampling.abs_cutoff);
      if (s.contains("synthetic") && !s.at("synthetic").is_null()) {
        const auto& g = s.at("synthetic");
        check_keys(g, {"sampling", "planted", "n_planted", "amp_min", "amp_max", "n_samples", "psnr_db", "n_lat",
                       "n_lon", "rate_scale"},
                   "sampling.synthetic");
        SyntheticSpec y;
        read(g, "sampling", y.sampling);
        read(g, "planted", y.planted);
        read(g, "n_planted", y.n_planted);
        read(g, "amp_min", y.amp_min);
        read(g, "amp_max", y.amp_max);
        read(g, "n_samples", y.n_samples);
        read(g, "psnr_db", y.psnr_db);
        read(g, "n_lat", y.n_lat);
        read(g, "n_lon", y.n_lon);
        read(g, "rate_scale", y.rate_scale);
        c.sampling.synthetic = y;
      }
    }
    if (j.contains("cost")) {
      check_keys(j.at("cost"), {"kind", "rho_rel"}, "cost");
      read(j.at("cost"), "kind", c.cost.kind);
      read(j.at("cost"), "rho_rel", c.cost.rho_rel);
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      check_keys(s, {"kind", "lambda", "mu", "eps_stop", "max_iter", "theta", "tau", "sigma", "cg_tol", "cg_max_iter"},
                 "solver");
      read(s, "kind", c.solver.kind);
      read(s, "lambda", c.solver.lambda);
      read(s, "mu", c.solver.mu);
      read(s, "eps_stop", c.solver.eps_stop);
      read(s, "max_iter", c.solver.max_iter);
      read(s, "theta", c.solver.theta);
      read(s, "tau", c.solver.tau);
      read(s, "sigma", c.solver.sigma);
      read(s, "cg_tol", c.solver.cg_tol);
      read(s, "cg_max_iter", c.solver.cg_max_iter);
    }
    read(j, "seed", c.seed);
    if (j.contains("outputs")) {
      const auto& o = j.at("outputs");
      check_keys(o, {"dir", "coefficients", "manifest", "trace", "raster"}, "outputs");
      read(o, "dir", c.outputs.dir);
      read(o, "coefficients", c.outputs.coefficients);
      read(o, "manifest", c.outputs.manifest);
      read(o, "trace", c.outputs.trace);
      if (o.contains("raster") && !o.at("raster").is_null()) {
        check_keys(o.at("raster"), {"n_lat", "n_lon", "file"}, "outputs.raster");
        RasterSpec r;
        read(o.at("raster"), "n_lat", r.n_lat);
        read(o.at("raster"), "n_lon", r.n_lon);
        read(o.at("raster"), "file", r.file);
        c.outputs.raster = r;
      }
    }
    if (j.contains("lambda_sweep") && !j.at("lambda_sweep").is_null()) {
      const auto& w = j.at("lambda_sweep");
      check_keys(w, {"min", "max", "count"}, "lambda_sweep");
      SweepSpec s;
      read(w, "min", s.lambda_min);
      read(w, "max", s.lambda_max);
      read(w, "count", s.count);
      c.sweep = s;
    }
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigurationError("config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  json j;
  j["kernel"] = {{"family", kernel.family},
                 {"beta", kernel.beta},
                 {"d", kernel.d},
                 {"k", kernel.k},
                 {"epsilon", opt(kernel.epsilon)},
                 {"fwhm_deg", opt(kernel.fwhm_deg)},
                 {"convention", kernel.convention},
                 {"green_tolerance", kernel.green_tolerance}};
  j["knots"] = {{"fibonacci", n_knots}};
  json synth = nullptr;
  if (sampling.synthetic) {
    const auto& y = *sampling.synthetic;
    synth = {{"sampling", y.sampling}, {"planted", y.planted}, {"n_planted", y.n_planted},
             {"amp_min", y.amp_min},   {"amp_max", y.amp_max},  {"n_samples", y.n_samples},
             {"psnr_db", opt(y.psnr_db)}, {"n_lat", y.n_lat},   {"n_lon", y.n_lon},
             {"rate_scale", y.rate_scale}};
  }
  j["sampling"] = {{"scatter_csv", opt(sampling.scatter_csv)},
                   {"patch_csv", opt(sampling.patch_csv)},
                   {"synthetic", synth},
                   {"patch_quadrature", sampling.patch_quadrature},
                   {"abs_cutoff", sampling.abs_cutoff}};
  j["cost"] = {{"kind", cost.kind}, {"rho_rel", cost.rho_rel}};
  j["solver"] = {{"kind", solver.kind},         {"lambda", solver.lambda},   {"mu", solver.mu},
                 {"eps_stop", solver.eps_stop}, {"max_iter", solver.max_iter}, {"theta", solver.theta},
                 {"tau", opt(solver.tau)},      {"sigma", opt(solver.sigma)},  {"cg_tol", solver.cg_tol},
                 {"cg_max_iter", solver.cg_max_iter}};
  j["seed"] = seed;
  json raster = nullptr;
  if (outputs.raster) raster = {{"n_lat", outputs.raster->n_lat}, {"n_lon", outputs.raster->n_lon}, {"file", outputs.raster->file}};
  j["outputs"] = {{"dir", outputs.dir},
                  {"coefficients", outputs.coefficients},
                  {"manifest", outputs.manifest},
                  {"trace", outputs.trace},
                  {"raster", raster}};
  j["lambda_sweep"] = sweep ? json{{"min", sweep->lambda_min}, {"max", sweep->lambda_max}, {"count", sweep->count}}
                            : json(nullptr);
  return j;
}

void RunConfig::validate() const {
  const int sources = int(sampling.scatter_csv.has_value()) + int(sampling.patch_csv.has_value()) +
                      int(sampling.synthetic.has_value());
  if (sources != 1)
    throw ConfigurationError("config: exactly one of sampling.scatter_csv, sampling.patch_csv, sampling.synthetic required");
  const std::set<std::string> families{"matern", "wendland", "sobolev"};
  if (!families.count(kernel.family)) throw ConfigurationError("config: unknown kernel family '" + kernel.family + "'");
  if (kernel.convention != "standard" && kernel.convention != "unit_rate")
    throw ConfigurationError("config: kernel.convention must be standard or unit_rate");
  if (n_knots < 1) throw ConfigurationError("config: knots.fibonacci must be >= 1");
  if (sampling.patch_quadrature < 2) throw ConfigurationError("config: sampling.patch_quadrature must be >= 2");
  if (!(sampling.abs_cutoff >= 0.0)) throw ConfigurationError("config: sampling.abs_cutoff must be >= 0");
  try {
    cost_kind_from_string(cost.kind);
  } catch (const InputError& e) {
    throw ConfigurationError(std::string("config: ") + e.what());
  }
  if (cost.kind == "l2ball" && !(cost.rho_rel > 0.0)) throw ConfigurationError("config: cost.rho_rel must be > 0");
  if (solver.kind != "pds" && solver.kind != "apgd" && solver.kind != "tikhonov")
    throw ConfigurationError("config: solver.kind must be pds, apgd or tikhonov");
  if (solver.kind == "apgd" && cost.kind != "ls")
    throw ConfigurationError("config: apgd needs the smooth least-squares cost (cost.kind = ls)");
  const bool dirac = sampling.scatter_csv || (sampling.synthetic && sampling.synthetic->sampling == "dirac");
  if (solver.kind == "tikhonov") {
    if (!dirac) throw ConfigurationError("config: the tikhonov baseline supports point samples only");
    if (!(solver.mu > 0.0)) throw ConfigurationError("config: solver.mu must be > 0");
  }
  if (!(solver.lambda >= 0.0)) throw ConfigurationError("config: solver.lambda must be >= 0");
  if (sampling.synthetic) {
    const auto& y = *sampling.synthetic;
    if (y.sampling != "dirac" && y.sampling != "patches")
      throw ConfigurationError("config: synthetic.sampling must be dirac or patches");
    if (y.planted != "lattice" && y.planted != "random")
      throw ConfigurationError("config: synthetic.planted must be lattice or random");
    if (y.n_planted < 1) throw ConfigurationError("config: synthetic.n_planted must be >= 1");
    if (y.sampling == "dirac" && y.n_samples < 1) throw ConfigurationError("config: synthetic.n_samples must be >= 1");
    if (y.sampling == "patches" && (y.n_lat < 1 || y.n_lon < 1))
      throw ConfigurationError("config: synthetic.n_lat and n_lon must be >= 1");
  }
  if (sweep && (sweep->count < 1 || !(sweep->lambda_min > 0.0) || sweep->lambda_max < sweep->lambda_min))
    throw ConfigurationError("config: lambda_sweep needs count >= 1 and 0 < min <= max");
  if (outputs.raster && (outputs.raster->n_lat < 2 || outputs.raster->n_lon < 2))
    throw ConfigurationError("config: raster grid must be at least 2 x 2");
}

ZonalKernel make_kernel(const KernelSpec& spec) {
  if (spec.family == "sobolev") return sobolev_green_zonal(spec.beta, 3, spec.green_tolerance);
  std::function<ZonalKernel(double)> make;
  if (spec.family == "matern") {
    const auto conv = spec.convention == "unit_rate" ? MaternConvention::unit_rate : MaternConvention::standard;
    make = [&spec, conv](double e) { return matern_zonal(spec.beta, e, conv); };
  } else if (spec.family == "wendland") {
    make = [&spec](double e) { return wendland_zonal(spec.d, spec.k, e); };
  } else {
    throw ConfigurationError("unknown kernel family '" + spec.family + "'");
  }
  if (spec.fwhm_deg) return make(epsilon_for_fwhm(make, *spec.fwhm_deg));
  if (!spec.epsilon) throw ConfigurationError("kernel: epsilon or fwhm_deg required");
  return make(*spec.epsilon);
}

// ---- runs ----------------------------------------------------------------------

namespace {

struct SolveOutcome {
  SolveOutcome(SplineField f, Eigen::VectorXd fit) : field(std::move(f)), fitted(std::move(fit)) {}

  SplineField field;
  Eigen::VectorXd fitted;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double data_term = 0.0;
  double infeasibility = 0.0;
  std::vector<double> trace;
  std::vector<double> infeasibility_trace;
  double tau = 0.0, sigma = 0.0;
};

}  // namespace

RunManifest run_reconstruction(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate();

  const ZonalKernel kernel = make_kernel(config.kernel);
  const KnotSet knots = fibonacci_lattice(static_cast<std::size_t>(config.n_knots));
  const auto& sp = config.sampling;

  std::vector<SamplingFunctional> functionals;
  std::vector<Direction> sample_points;
  Eigen::VectorXd y;
  std::optional<SplineField> planted;
  std::optional<GramMatrix> gram;

  auto build_gram = [&]() -> const GramMatrix& {
    if (!gram) gram = assemble_gram(kernel, functionals, knots, sp.abs_cutoff);
    return *gram;
  };

  if (sp.scatter_csv) {
    auto data = load_scatter_csv(*sp.scatter_csv);
    if (data.directions.empty()) throw InputError("scatter file has no samples");
    sample_points = data.directions;
    for (const auto& d : data.directions) functionals.emplace_back(DiracSample{d});
    y = data.values;
  } else if (sp.patch_csv) {
    auto data = load_patch_counts_csv(*sp.patch_csv);
    if (data.patches.empty()) throw InputError("patch file has no patches");
    for (const auto& b : data.patches) functionals.emplace_back(PatchSample{b, sp.patch_quadrature});
    y.resize(static_cast<Eigen::Index>(data.counts.size()));
    for (std::size_t i = 0; i < data.counts.size(); ++i) y[static_cast<Eigen::Index>(i)] = double(data.counts[i]);
  } else {
    const auto& g = *sp.synthetic;
    const std::size_t k = static_cast<std::size_t>(g.n_planted);
    planted = g.planted == "lattice" ? plant_on_knots(kernel, knots, k, g.amp_min, g.amp_max, derive_seed(config.seed, 1))
                                     : plant_spline(kernel, k, g.amp_min, g.amp_max, derive_seed(config.seed, 1));
    if (g.sampling == "dirac") {
      sample_points = random_directions(static_cast<std::size_t>(g.n_samples), derive_seed(config.seed, 2));
      for (const auto& d : sample_points) functionals.emplace_back(DiracSample{d});
      const Eigen::VectorXd clean = evaluate(*planted, sample_points);
      y = g.psnr_db ? add_gaussian_noise(clean, *g.psnr_db, derive_seed(config.seed, 3)) : clean;
    } else {
      for (const auto& b : equal_angle_patch_grid(g.n_lat, g.n_lon))
        functionals.emplace_back(PatchSample{b, sp.patch_quadrature});
      Eigen::VectorXd rates;
      if (g.planted == "lattice") {
        rates = build_gram().apply(planted->coeffs());
      } else {
        rates = assemble_gram(kernel, functionals, planted->knots(), sp.abs_cutoff).apply(planted->coeffs());
      }
      rates = (g.rate_scale * rates).cwiseMax(0.0);
      const auto counts = poisson_counts(rates, derive_seed(config.seed, 4));
      y.resize(static_cast<Eigen::Index>(counts.size()));
      for (std::size_t i = 0; i < counts.size(); ++i) y[static_cast<Eigen::Index>(i)] = double(counts[i]);
    }
  }

  const CostKind cost_kind = cost_kind_from_string(config.cost.kind);
  auto make_model = [&]() -> CostModel {
    switch (cost_kind) {
      case CostKind::exact_match: return CostModel::exact_match(y);
      case CostKind::l1: return CostModel::l1(y);
      case CostKind::l2_ball: return CostModel::l2_ball(y, config.cost.rho_rel * y.norm());
      case CostKind::kl: return CostModel::kl(y);
      case CostKind::least_squares: return CostModel::least_squares(y);
    }
    throw ContractError("unknown cost");
  };

  json extra = json::object();
  auto solve = [&](double lambda) -> SolveOutcome {
    if (config.solver.kind == "tikhonov") {
      const KnotSet sample_knots(sample_points);
      const LegendreSeries conv = self_convolve(fourier_legendre(kernel));
      const Eigen::MatrixXd h = knot_gram(conv, sample_knots);
      const Eigen::VectorXd c = tikhonov_solve(h, y, config.solver.mu, config.solver.cg_tol, config.solver.cg_max_iter);
      const double peak = resynthesize(conv, 1.0);
      const Eigen::VectorXd fitted = h * c;
      SolveOutcome o(synthesize(series_kernel(conv, 2.0 * kernel.beta()), sample_knots, c * peak), fitted);
      o.converged = true;
      o.data_term = (y - fitted).squaredNorm();
      o.objective = o.data_term + config.solver.mu * c.dot(fitted);
      o.trace = {o.objective};
      return o;
    }
    const GramMatrix& g = build_gram();
    const CostModel model = make_model();
    SolverConfig sc;
    sc.lambda = lambda;
    sc.eps_stop = config.solver.eps_stop;
    sc.max_iter = config.solver.max_iter;
    sc.tau = config.solver.tau;
    sc.sigma = config.solver.sigma;
    sc.theta = config.solver.theta;
    const SolverResult r = config.solver.kind == "apgd" ? apgd_solve(g, model, sc) : pds_solve(g, model, sc);
    const Eigen::VectorXd fitted = g.apply(r.x);
    SolveOutcome o(synthesize(kernel, knots, r.x), fitted);
    o.iterations = r.iterations;
    o.converged = r.converged;
    o.data_term = model.finite_value(fitted);
    o.objective = o.data_term + lambda * r.x.lpNorm<1>();
    o.infeasibility = model.infeasibility(fitted);
    o.trace = r.objective_trace;
    o.infeasibility_trace = r.infeasibility_trace;
    o.tau = r.tau;
    o.sigma = r.sigma;
    return o;
  };

  const SolveOutcome main = solve(config.solver.lambda);
  const fs::path dir = config.outputs.dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  save_coefficients_csv(dir / config.outputs.coefficients, main.field);
  {
    std::string t = "iteration,objective,infeasibility\n";
    for (std::size_t i = 0; i < main.trace.size(); ++i)
      t += std::to_string(i + 1) + "," + fmt17(main.trace[i]) + "," +
           fmt17(i < main.infeasibility_trace.size() ? main.infeasibility_trace[i] : 0.0) + "\n";
    write_text(dir / config.outputs.trace, t);
  }
  json outputs = {{"coefficients", (dir / config.outputs.coefficients).string()},
                  {"trace", (dir / config.outputs.trace).string()}};
  if (config.outputs.raster) {
    const auto& r = *config.outputs.raster;
    export_raster(main.field, r.n_lat, r.n_lon, dir / r.file);
    outputs["raster"] = (dir / r.file).string();
  }
  if (planted) {
    save_coefficients_csv(dir / "planted_coefficients.csv", *planted);
    outputs["planted"] = (dir / "planted_coefficients.csv").string();
    json pj = {{"n_planted", config.sampling.synthetic->n_planted}, {"gtv_norm", gtv_norm(*planted)}};
    if (gram && config.sampling.synthetic->planted == "lattice" && config.solver.kind != "tikhonov") {
      const CostModel model = make_model();
      const Eigen::VectorXd gp = gram->apply(planted->coeffs());
      pj["objective"] = model.finite_value(gp) + config.solver.lambda * planted->coeffs().lpNorm<1>();
      pj["infeasibility"] = model.infeasibility(gp);
    }
    extra["planted"] = pj;
  }

  json sweep = nullptr;
  if (config.sweep) {
    sweep = json::array();
    const auto& s = *config.sweep;
    for (int i = 0; i < s.count; ++i) {
      const double lambda =
          s.count == 1 ? s.lambda_min : s.lambda_min * std::pow(s.lambda_max / s.lambda_min, double(i) / (s.count - 1));
      const SolveOutcome o = solve(lambda);
      const std::string name = "coefficients_lambda_" + std::to_string(i) + ".csv";
      save_coefficients_csv(dir / name, o.field);
      sweep.push_back({{"lambda", lambda},
                       {"iterations", o.iterations},
                       {"converged", o.converged},
                       {"objective", o.objective},
                       {"residual_norm", (y - o.fitted).norm()},
                       {"sparsity_count", sparsity_report(o.field, 1e-4).count},
                       {"coefficients", (dir / name).string()}});
    }
  }

  RunManifest m;
  m.iterations = main.iterations;
  m.converged = main.converged;
  m.objective = main.objective;
  m.residual = (y - main.fitted).norm();
  m.relative_residual = y.norm() > 0.0 ? m.residual / y.norm() : m.residual;
  m.sparsity = sparsity_report(main.field, 1e-4).count;
  m.path = dir / config.outputs.manifest;

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json doc;
  doc["version"] = kVersion;
  doc["timestamp"] = iso_timestamp();
  doc["seed"] = config.seed;
  doc["config"] = config.to_json();
  doc["kernel"] = {{"description", kernel.description()},
                   {"family", to_string(kernel.family())},
                   {"beta", kernel.beta()},
                   {"epsilon", kernel.epsilon()},
                   {"support_tmin", opt(kernel.support_tmin())}};
  doc["problem"] = {{"n_knots", knots.size()}, {"n_samples", y.size()}, {"data_norm", y.norm()}};
  if (gram) {
    doc["problem"]["gram_nnz"] = gram->nnz();
    doc["problem"]["gram_density"] = gram->density();
    doc["problem"]["spectral_norm"] = spectral_norm(*gram);
  }
  doc["result"] = {{"iterations", m.iterations},
                   {"converged", m.converged},
                   {"objective", m.objective},
                   {"data_term", main.data_term},
                   {"gtv_norm", gtv_norm(main.field)},
                   {"residual_norm", m.residual},
                   {"relative_residual", m.relative_residual},
                   {"infeasibility", main.infeasibility},
                   {"sparsity_count", m.sparsity},
                   {"sparsity_threshold", 1e-4},
                   {"n_coefficients", main.field.size()},
                   {"min_fitted", main.fitted.size() ? main.fitted.minCoeff() : 0.0},
                   {"tau", main.tau},
                   {"sigma", main.sigma}};
  doc["outputs"] = outputs;
  doc["lambda_sweep"] = sweep;
  for (auto& [k, v] : extra.items()) doc[k] = v;
  doc["wall_time_s"] = wall;
  m.document = doc;
  write_text(m.path, doc.dump(2) + "\n");
  return m;
}

}  // namespace gtv
