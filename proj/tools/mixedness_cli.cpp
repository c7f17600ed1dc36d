// mixedness: purity maps, minimal-mixedness scans and harvesting reports.
//
// Exit codes: 0 success, 2 config error, 3 numerical error (partial output is
// still written and flagged).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <mixedness/mixedness.hpp>

namespace fs = std::filesystem;
using namespace mixedness;
using io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config;
  std::string out = ".";
  int workers = default_workers();
  std::optional<double> tol;
};

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << content;
    digests_[name] = sha256_hex(content);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void manifest(const std::string& command, const json& resolved, double wall_time) {
    json m{{"schema", io::kSchema},
           {"command", command},
           {"config", resolved},
           {"version", kVersion},
           {"wall_time_s", wall_time},
           {"outputs", digests_}};
    std::ofstream f(dir_ / "manifest.json", std::ios::binary);
    f << m.dump(2) << "\n";
  }

 private:
  fs::path dir_;
  std::map<std::string, std::string> digests_;
};

io::ConfigReader load(const Options& o) {
  if (o.config.empty()) throw io::ConfigError("<cli>", 0, "--config is required");
  return io::ConfigReader::from_file(o.config);
}

// ---------------------------------------------------------------------------

int run_grid(const Options& o, OutputSet& out, json& resolved_out, bool curve) {
  const auto cfg = load(o);
  const auto profile = io::read_profile(cfg);
  const auto field = io::read_field(cfg);
  const auto quad = io::read_quadrature(cfg, o.tol);
  const auto x = io::read_axis(cfg, "x");
  const auto y = io::read_axis(cfg, "y");
  if (curve && x.count != 1 && y.count != 1) cfg.fail({"grid"}, "purity-curve needs one axis with count = 1");
  if (profile.dim() != field.dim) cfg.fail({"field", "dim"}, "field dim does not match the profile family");

  json resolved{{"profile", io::profile_to_json(profile)},
                {"field", io::field_to_json(field)},
                {"quadrature", io::quadrature_to_json(quad)},
                {"grid",
                 {{"x", {{"min", x.min}, {"max", x.max}, {"count", x.count}}},
                  {"y", {{"min", y.min}, {"max", y.max}, {"count", y.count}}}}}};
  const auto grid = purity_grid(profile, field, x, y, quad, o.workers);

  resolved_out = resolved;
  json meta = resolved;
  switch (field.regulator) {
    case Regulator::Mass: meta["axes"] = {{"x", "T/M"}, {"y", "ell*M"}}; break;
    case Regulator::Cavity: meta["axes"] = {{"x", "T*L"}, {"y", "ell/L"}}; break;
    case Regulator::None: meta["axes"] = {{"x", "T*ell_ref"}, {"y", "ell/ell_ref"}}; break;
  }
  const std::string stem = curve ? "purity_curve" : "purity_map";
  out.write(stem + ".csv", io::grid_to_csv(grid));
  out.write_json(stem + ".json", io::grid_to_json(grid, meta));
  return grid.all_ok() ? kExitOk : kExitNumerical;
}

int run_min_mix(const Options& o, OutputSet& out, json& resolved_out) {
  const auto cfg = load(o);
  const auto quad = io::read_quadrature(cfg, o.tol);
  const double ell = cfg.number({"ell"}, 1.0);
  double beta;
  if (cfg.has({"beta"})) {
    beta = cfg.number({"beta"});
  } else {
    beta = FieldSpec::beta_from_temperature(cfg.number({"temperature"}, 0.0));
  }
  if (!(ell > 0.0)) cfg.fail({"ell"}, "ell must be > 0");
  if (!(beta > 0.0)) cfg.fail({"beta"}, "beta must be > 0");

  std::vector<MinMixEntry> points;
  json resolved{{"ell", ell}, {"beta", std::isinf(beta) ? json("inf") : json(beta)},
                {"quadrature", io::quadrature_to_json(quad)}};
  bool ladder = false;
  if (cfg.has({"ladder"})) {
    ladder = true;
    const auto& arr = cfg.at({"ladder"});
    if (!arr.is_array() || arr.empty()) cfg.fail({"ladder"}, "ladder must be a non-empty array of [m, kappa*ell/pi]");
    for (const auto& e : arr) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number())
        cfg.fail({"ladder"}, "ladder entries must be [m, kappa*ell/pi]");
      points.push_back({e[0].get<int>(), e[1].get<double>() * std::numbers::pi / ell, 0.0});
    }
    resolved["ladder"] = arr;
  } else {
    const auto& ms = cfg.at({"m"});
    if (!ms.is_array() || ms.empty()) cfg.fail({"m"}, "m must be a non-empty integer array");
    const auto kl = cfg.number_list({"kappa_ell_over_pi"});
    if (kl.empty()) cfg.fail({"kappa_ell_over_pi"}, "kappa list must not be empty");
    for (const auto& m : ms) {
      if (!m.is_number_integer()) cfg.fail({"m"}, "m entries must be integers");
      for (double k : kl) points.push_back({m.get<int>(), k * std::numbers::pi / ell, 0.0});
    }
    resolved["m"] = ms;
    resolved["kappa_ell_over_pi"] = kl;
  }
  for (const auto& p : points)
    if (p.m < 3) cfg.fail({ladder ? "ladder" : "m"}, "ZKappa requires m >= 3");

  parallel_for(points.size(), o.workers, [&](std::size_t i) {
    points[i].u = u_objective(points[i].m, points[i].kappa, ell, beta, quad);
  });
  MinMixEntry best = points.front();
  for (const auto& p : points)
    if (p.u < best.u) best = p;

  json table = json::array();
  for (const auto& p : points)
    table.push_back({{"m", p.m}, {"kappa_ell_over_pi", p.kappa * ell / std::numbers::pi}, {"u", p.u},
                     {"u_minus_1", p.u - 1.0}});
  json report{{"schema", io::kSchema},
              {"input", resolved},
              {"table", table},
              {"best", {{"m", best.m}, {"kappa_ell_over_pi", best.kappa * ell / std::numbers::pi}, {"u", best.u}}}};
  if (ladder) {
    bool decreasing = true;
    for (std::size_t i = 1; i < points.size(); ++i) decreasing = decreasing && points[i].u < points[i - 1].u;
    report["strictly_decreasing"] = decreasing;
  }
  resolved_out = resolved;
  out.write_json("min_mix.json", report);
  return kExitOk;
}

struct HarvestInput {
  DetectorSpec A, B;
  FieldSpec field;
  QuadratureConfig quad;
  DetectorKind kind;
  json resolved;
};

HarvestInput read_harvest(const io::ConfigReader& cfg, const Options& o) {
  HarvestInput in;
  DetectorKind kind;
  try {
    kind = parse_detector_kind(cfg.string({"detectors", "kind"}, "qubit"));
  } catch (const ValidationError& e) {
    cfg.fail({"detectors", "kind"}, e.what());
  }
  in.kind = kind;
  in.A = io::read_detector(cfg, "A", kind);
  in.B = io::read_detector(cfg, "B", kind);
  in.field = io::read_field(cfg);
  in.quad = io::read_quadrature(cfg, o.tol);
  const bool ok3 = in.field.dim == 3 && in.field.regulator != Regulator::Cavity;
  const bool ok1 = in.field.dim == 1 && in.field.regulator == Regulator::Cavity;
  if (!ok3 && !ok1) cfg.fail({"field"}, "harvest supports dim-3 free space or a dim-1 cavity");
  in.resolved = {{"detectors", {{"kind", detector_kind_name(kind)}, {"A", io::detector_to_json(in.A)},
                                {"B", io::detector_to_json(in.B)}}},
                 {"field", io::field_to_json(in.field)},
                 {"quadrature", io::quadrature_to_json(in.quad)}};
  return in;
}

json negativity_pair(const HarvestElements& e, double zA, double zB, DetectorKind kind) {
  const double closed = negativity(e, zA, zB);
  const double pt = pt_negativity_oracle(assemble_state(e, zA, zB, kind));
  return {{"zA", zA}, {"zB", zB}, {"closed_form", closed}, {"pt_oracle", pt}, {"difference", closed - pt}};
}

std::vector<double> default_z_sweep(const ThresholdResult& t) {
  if (t.harvesting) return {0.0, 0.5 * t.z_c, t.z_c, 2.0 * t.z_c};
  return {0.0, 1e-4, 1e-3, 1e-2};
}

int run_harvest(const Options& o, OutputSet& out, json& resolved_out, bool threshold_only) {
  const auto cfg = load(o);
  auto in = read_harvest(cfg, o);
  const double lambda_ref = std::sqrt(in.A.coupling * in.B.coupling);
  const auto e = compute_elements(in.A, in.B, in.field, in.quad, o.workers);
  const auto th = threshold(e, lambda_ref);

  std::vector<double> z_curve = cfg.has({"lambda_c_z"}) ? cfg.number_list({"lambda_c_z"})
                                                        : std::vector<double>{1e-4, 4e-4, 1e-3, 4e-3, 1e-2};
  json lc = json::array();
  for (double z : z_curve) {
    if (!(z >= 0.0 && z < 1.0)) cfg.fail({"lambda_c_z"}, "z values must lie in [0, 1)");
    lc.push_back({{"z", z}, {"lambda_c", th.harvesting ? json(th.lambda_c(z)) : json(nullptr)}});
  }
  json threshold_json{{"z_c", th.z_c},
                      {"lambda_ref", th.lambda_ref},
                      {"harvesting", th.harvesting},
                      {"description", th.description()},
                      {"lambda_c", lc}};
  in.resolved["lambda_c_z"] = z_curve;
  json report{{"schema", io::kSchema}, {"input", in.resolved}, {"threshold", threshold_json}};

  if (threshold_only) {
    resolved_out = in.resolved;
    out.write_json("threshold.json", report);
    return kExitOk;
  }
  report["elements"] = io::elements_to_json(e);
  report["negativity"] = negativity_pair(e, in.A.z, in.B.z, in.kind);

  std::vector<double> zs = cfg.has({"z_sweep"}) ? cfg.number_list({"z_sweep"}) : default_z_sweep(th);
  json sweep = json::array();
  for (double z : zs) {
    if (!(z >= 0.0 && z < 1.0)) cfg.fail({"z_sweep"}, "z values must lie in [0, 1)");
    sweep.push_back(negativity_pair(e, z, z, in.kind));
  }
  report["z_sweep"] = sweep;
  in.resolved["z_sweep"] = zs;

  std::vector<double> ladder = cfg.has({"lambda_ladder"}) ? cfg.number_list({"lambda_ladder"})
                                                          : std::vector<double>{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  json lad = json::array();
  for (double s : ladder) {
    if (!(s > 0.0)) cfg.fail({"lambda_ladder"}, "ladder scale factors must be > 0");
    const auto es = e.rescaled(s, s);
    json row = negativity_pair(es, in.A.z, in.B.z, in.kind);
    row["scale"] = s;
    row["z_c"] = negativity(es, 0.0, 0.0);
    lad.push_back(row);
  }
  report["lambda_ladder"] = lad;
  in.resolved["lambda_ladder"] = ladder;
  report["input"] = in.resolved;
  resolved_out = in.resolved;
  out.write_json("harvest.json", report);
  return kExitOk;
}

int run_oracle(const Options& o, OutputSet& out, json& resolved_out) {
  oracle::CavitySetup s;
  if (!o.config.empty()) {
    const auto cfg = load(o);
    s.length = cfg.number({"length"}, s.length);
    s.n_modes = static_cast<int>(cfg.integer({"n_modes"}, s.n_modes));
    s.mass = cfg.number({"mass"}, s.mass);
    s.x_a = cfg.number({"x_a"}, s.x_a);
    s.x_b = cfg.number({"x_b"}, s.x_b);
    s.sigma = cfg.number({"sigma"}, s.sigma);
    s.gap = cfg.number({"gap"}, s.gap);
    s.switch_width = cfg.number({"switch_width"}, s.switch_width);
    s.switch_center = cfg.number({"switch_center"}, s.switch_center);
    s.coupling = cfg.number({"coupling"}, s.coupling);
    s.time_steps = static_cast<int>(cfg.integer({"time_steps"}, s.time_steps));
    s.space_points = static_cast<int>(cfg.integer({"space_points"}, s.space_points));
  }
  const auto r = oracle::run_cavity_oracle(s);
  json setup{{"length", s.length}, {"n_modes", s.n_modes}, {"mass", s.mass},
             {"x_a", s.x_a}, {"x_b", s.x_b}, {"sigma", s.sigma},
             {"gap", s.gap}, {"switch_width", s.switch_width}, {"switch_center", s.switch_center},
             {"coupling", s.coupling}, {"time_steps", s.time_steps}, {"space_points", s.space_points}};
  json report{{"schema", io::kSchema},
              {"kind", "cavity_fock_dyson_oracle"},
              {"setup", setup},
              {"results",
               {{"L_AA", r.L_AA},
                {"L_BB", r.L_BB},
                {"L_AB", io::complex_json(r.L_AB)},
                {"M", io::complex_json(r.M)},
                {"abs_M", std::abs(r.M)}}}};
  resolved_out = setup;
  out.write_json("cavity_oracle.json", report);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localized-mode purity and entanglement-harvesting numerics"};
  app.require_subcommand(1);
  Options opt;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"purity-map", "2D purity grid over (temperature, size) axes"},
      {"purity-curve", "purity along one axis (a grid with one axis of count 1)"},
      {"min-mix", "u = (VV + WW)/2 over (m, kappa) for ZKappa profiles"},
      {"harvest", "harvesting elements, negativity, z sweep and coupling ladder"},
      {"threshold", "threshold mixedness z_c and critical couplings only"},
      {"oracle", "truncated-Fock Dyson oracle for two qubits in a 1D cavity"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [n, help] : commands) {
    auto* s = app.add_subcommand(n, help);
    s->add_option("--config", opt.config, "config file (JSON, schema 1)");
    s->add_option("--out", opt.out, "output directory");
    s->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
    s->add_option("--tol", opt.tol, "relative quadrature tolerance (overrides the config)");
    subs[n] = s;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  std::string command;
  for (const auto& [n, s] : subs)
    if (s->parsed()) command = n;

  const auto start = std::chrono::steady_clock::now();
  int rc = kExitOk;
  try {
    OutputSet out(opt.out);
    json resolved;
    if (command == "purity-map") rc = run_grid(opt, out, resolved, false);
    else if (command == "purity-curve") rc = run_grid(opt, out, resolved, true);
    else if (command == "min-mix") rc = run_min_mix(opt, out, resolved);
    else if (command == "harvest") rc = run_harvest(opt, out, resolved, false);
    else if (command == "threshold") rc = run_harvest(opt, out, resolved, true);
    else if (command == "oracle") rc = run_oracle(opt, out, resolved);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.manifest(command, resolved, wall);
  } catch (const io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << " (achieved " << e.achieved_tolerance() << ")\n";
    return kExitNumerical;
  } catch (const DomainError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (rc == kExitNumerical) std::cerr << "numerical error: some grid cells failed; outputs are flagged\n";
  return rc;
}
