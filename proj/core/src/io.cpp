#include "qpcr/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "qpcr/errors.hpp"

namespace qpcr {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

double parse_double(const std::string& s) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw IoError("not a number: '" + s + "'");
  }
  return value;
}

template <typename Int>
Int parse_int(const std::string& s) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw IoError("not an integer: '" + s + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

// "# a=1,b=2" -> {a: 1, b: 2}
std::map<std::string, std::string> parse_header(const std::string& line) {
  if (line.rfind("# ", 0) != 0) throw IoError("missing '# ' metadata header");
  std::map<std::string, std::string> kv;
  for (const auto& item : split(line.substr(2), ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw IoError("bad header item '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

const std::string& require_key(const std::map<std::string, std::string>& kv,
                               const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw IoError("header lacks '" + key + "'");
  return it->second;
}

void expect_line(std::istream& in, const std::string& expected) {
  std::string line;
  if (!std::getline(in, line) || line != expected) {
    throw IoError("expected column header '" + expected + "'");
  }
}

template <typename T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& traj, std::uint64_t seed,
                          std::uint64_t replicate) {
  auto out = open_out(path);
  const Kinetics& k = traj.kinetics;
  out << "# v=" << format_double(k.v()) << ",K=" << format_double(k.K())
      << ",z0=" << (traj.counts.empty() ? 0 : traj.counts.front())
      << ",seed=" << seed << ",replicate=" << replicate;
  if (k.exponent()) out << ",m=" << *k.exponent();
  out << "\ncycle,count,density\n";
  const auto x = density(traj);
  for (std::size_t n = 0; n < traj.size(); ++n) {
    out << n << ',' << traj.counts[n] << ',' << format_double(x[n]) << '\n';
  }
  finish(out, path);
}

TrajectoryFile read_trajectory_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trajectory file");
  const auto kv = parse_header(line);
  const double v = parse_double(require_key(kv, "v"));
  const double K = parse_double(require_key(kv, "K"));
  std::optional<Kinetics> k;
  if (kv.count("m")) {
    k = Kinetics::from_exponent(v, parse_int<int>(kv.at("m")));
  } else {
    k = Kinetics(v, K);
  }
  TrajectoryFile file{Trajectory{{}, *k}};
  file.z0 = parse_int<std::int64_t>(require_key(kv, "z0"));
  file.seed = parse_int<std::uint64_t>(require_key(kv, "seed"));
  if (kv.count("replicate")) {
    file.replicate = parse_int<std::uint64_t>(kv.at("replicate"));
  }
  expect_line(in, "cycle,count,density");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw IoError("bad trajectory row '" + line + "'");
    if (parse_int<std::size_t>(fields[0]) != file.trajectory.size()) {
      throw IoError("trajectory cycles must be consecutive from 0");
    }
    file.trajectory.counts.push_back(parse_int<std::int64_t>(fields[1]));
  }
  return file;
}

void write_ensemble_csv(const std::filesystem::path& path,
                        const WEnsemble& ens) {
  auto out = open_out(path);
  out << "# v=" << format_double(ens.v) << ",z=" << ens.z
      << ",n_gen=" << ens.n_gen << ",count=" << ens.count() << '\n';
  for (const double w : ens.samples) out << format_double(w) << '\n';
  finish(out, path);
}

WEnsemble read_ensemble_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty ensemble file");
  const auto kv = parse_header(line);
  WEnsemble ens;
  ens.v = parse_double(require_key(kv, "v"));
  ens.z = parse_int<std::int64_t>(require_key(kv, "z"));
  ens.n_gen = parse_int<int>(require_key(kv, "n_gen"));
  const auto count = parse_int<std::size_t>(require_key(kv, "count"));
  ens.samples.reserve(count);
  while (std::getline(in, line)) {
    if (!line.empty()) ens.samples.push_back(parse_double(line));
  }
  if (ens.samples.size() != count) {
    throw IoError("ensemble count does not match its header");
  }
  return ens;
}

void write_density_csv(const std::filesystem::path& path,
                       const DensityEstimate& est) {
  auto out = open_out(path);
  out << "grid,value\n";
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    out << format_double(est.grid[i]) << ',' << format_double(est.values[i])
        << '\n';
  }
  finish(out, path);
}

DensityEstimate read_density_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_line(in, "grid,value");
  DensityEstimate est;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw IoError("bad density row '" + line + "'");
    est.grid.push_back(parse_double(fields[0]));
    est.values.push_back(parse_double(fields[1]));
  }
  return est;
}

void write_h_curves_csv(const std::filesystem::path& path,
                        const std::vector<CurvePoint>& points) {
  auto out = open_out(path);
  out << "v,x,H,diagonal\n";
  for (const auto& p : points) {
    out << format_double(p.v) << ',' << format_double(p.x) << ','
        << format_double(p.h) << ',' << format_double(p.x) << '\n';
  }
  finish(out, path);
}

std::vector<CurvePoint> read_h_curves_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_line(in, "v,x,H,diagonal");
  std::vector<CurvePoint> points;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) throw IoError("bad curve row '" + line + "'");
    points.push_back({parse_double(fields[0]), parse_double(fields[1]),
                      parse_double(fields[2])});
  }
  return points;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

void to_json(nlohmann::json& j, const Precision& p) {
  j = {{"tol", p.tol}, {"max_iter", p.max_iter}};
}

void from_json(const nlohmann::json& j, Precision& p) {
  j.at("tol").get_to(p.tol);
  j.at("max_iter").get_to(p.max_iter);
}

void to_json(nlohmann::json& j, const EstimateSettings& s) {
  j = {{"estimate_v", s.estimate_v},
       {"run_mle", s.run_mle},
       {"mle_count", s.mle.count},
       {"mle_seed", s.mle.seed},
       {"mle_n_gen", s.mle.n_gen},
       {"g_precision", s.g_precision}};
}

void from_json(const nlohmann::json& j, EstimateSettings& s) {
  j.at("estimate_v").get_to(s.estimate_v);
  j.at("run_mle").get_to(s.run_mle);
  j.at("mle_count").get_to(s.mle.count);
  j.at("mle_seed").get_to(s.mle.seed);
  j.at("mle_n_gen").get_to(s.mle.n_gen);
  j.at("g_precision").get_to(s.g_precision);
}

void to_json(nlohmann::json& j, const EstimateReport& r) {
  j = nlohmann::json::object();
  j["z_hat_mle"] = r.z_hat_mle ? nlohmann::json(*r.z_hat_mle) : nlohmann::json(nullptr);
  j["z_hat_exact"] = r.z_hat_exact ? nlohmann::json(*r.z_hat_exact) : nlohmann::json(nullptr);
  j["z_hat_normal"] = r.z_hat_normal;
  j["z_hat_normal_count"] = clamp_count(r.z_hat_normal);
  j["v_hat"] = r.v_hat ? nlohmann::json(*r.v_hat) : nlohmann::json(nullptr);
  j["v_used"] = r.v_used;
  j["t_values"] = r.t_values;
  j["tau"] = r.tau;
  j["n_hit"] = r.n_hit;
  j["kappas"] = r.kappas;
  j["diagnostics"] = {{"t_spread", r.t_spread},
                      {"mle_profile", r.mle_profile},
                      {"mle_at_boundary", r.mle_at_boundary}};
  j["settings"] = r.settings;
}

void from_json(const nlohmann::json& j, EstimateReport& r) {
  r.z_hat_mle = optional_field<std::int64_t>(j, "z_hat_mle");
  r.z_hat_exact = optional_field<std::int64_t>(j, "z_hat_exact");
  j.at("z_hat_normal").get_to(r.z_hat_normal);
  r.v_hat = optional_field<double>(j, "v_hat");
  j.at("v_used").get_to(r.v_used);
  j.at("t_values").get_to(r.t_values);
  j.at("tau").get_to(r.tau);
  j.at("n_hit").get_to(r.n_hit);
  j.at("kappas").get_to(r.kappas);
  const auto& d = j.at("diagnostics");
  d.at("t_spread").get_to(r.t_spread);
  d.at("mle_profile").get_to(r.mle_profile);
  d.at("mle_at_boundary").get_to(r.mle_at_boundary);
  j.at("settings").get_to(r.settings);
}

void to_json(nlohmann::json& j, const Observation& o) {
  j = {{"rho", o.rho},     {"K", o.K},       {"n_hit", o.n_hit},
       {"tau", o.tau},     {"kappas", o.kappas}};
  j["v_known"] = o.v_known ? nlohmann::json(*o.v_known) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, Observation& o) {
  j.at("rho").get_to(o.rho);
  j.at("K").get_to(o.K);
  o.n_hit = j.value("n_hit", 0);
  j.at("tau").get_to(o.tau);
  j.at("kappas").get_to(o.kappas);
  o.v_known = optional_field<double>(j, "v_known");
}

void to_json(nlohmann::json& j, const ScenarioSpec& s) {
  j = {{"kind", to_string(s.kind)},
       {"v", s.v},
       {"m", s.m},
       {"z0", s.z0},
       {"rho", s.rho},
       {"replicates", s.replicates},
       {"seed", s.seed},
       {"h_precision", s.h_precision},
       {"g_precision", s.g_precision},
       {"out", s.out},
       {"reference_count", s.reference_count},
       {"shift", s.shift},
       {"extra_cycles", s.extra_cycles},
       {"estimate_v", s.estimate_v},
       {"run_mle", s.run_mle},
       {"mle_count", s.mle_count},
       {"gamma", s.gamma},
       {"c", s.c},
       {"m_list", s.m_list},
       {"v_list", s.v_list},
       {"x_max", s.x_max},
       {"x_step", s.x_step}};
}

void from_json(const nlohmann::json& j, ScenarioSpec& s) {
  if (!j.is_object()) throw IoError("scenario config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") {
      s.kind = parse_scenario_kind(value.get<std::string>());
    } else if (key == "v") {
      value.get_to(s.v);
    } else if (key == "m") {
      value.get_to(s.m);
    } else if (key == "z0") {
      value.get_to(s.z0);
    } else if (key == "rho") {
      value.get_to(s.rho);
    } else if (key == "replicates") {
      value.get_to(s.replicates);
    } else if (key == "seed") {
      value.get_to(s.seed);
    } else if (key == "h_precision") {
      value.get_to(s.h_precision);
    } else if (key == "g_precision") {
      value.get_to(s.g_precision);
    } else if (key == "out") {
      value.get_to(s.out);
    } else if (key == "reference_count") {
      value.get_to(s.reference_count);
    } else if (key == "shift") {
      value.get_to(s.shift);
    } else if (key == "extra_cycles") {
      value.get_to(s.extra_cycles);
    } else if (key == "estimate_v") {
      value.get_to(s.estimate_v);
    } else if (key == "run_mle") {
      value.get_to(s.run_mle);
    } else if (key == "mle_count") {
      value.get_to(s.mle_count);
    } else if (key == "gamma") {
      value.get_to(s.gamma);
    } else if (key == "c") {
      value.get_to(s.c);
    } else if (key == "m_list") {
      value.get_to(s.m_list);
    } else if (key == "v_list") {
      value.get_to(s.v_list);
    } else if (key == "x_max") {
      value.get_to(s.x_max);
    } else if (key == "x_step") {
      value.get_to(s.x_step);
    } else {
      throw IoError("unknown scenario key '" + key + "'");
    }
  }
}

void to_json(nlohmann::json& j, const ExperimentResult& r) {
  j = nlohmann::json::object();
  j["kind"] = to_string(r.kind);
  j["seed"] = r.seed;
  j["summary"] = r.summary;
  auto rows = nlohmann::json::array();
  for (const auto& q : r.quantiles) {
    rows.push_back(
        {{"q", q.q}, {"observed", q.observed}, {"reference", q.reference}});
  }
  j["quantiles"] = std::move(rows);
  j["records"] = r.records;
  j["runtime_seconds"] = r.runtime_seconds;
}

void from_json(const nlohmann::json& j, ExperimentResult& r) {
  r.kind = parse_scenario_kind(j.at("kind").get<std::string>());
  j.at("seed").get_to(r.seed);
  j.at("summary").get_to(r.summary);
  r.quantiles.clear();
  for (const auto& row : j.at("quantiles")) {
    r.quantiles.push_back({row.at("q").get<double>(),
                           row.at("observed").get<double>(),
                           row.at("reference").get<double>()});
  }
  j.at("records").get_to(r.records);
  j.at("runtime_seconds").get_to(r.runtime_seconds);
}

}  // namespace qpcr
