// qdwell command line: batch spectra, barrier scans, well phase shifts and
// Lorentzian fits, all emitting deterministic CSV.
//
// Exit codes: 0 success, 2 config/input error, 3 numerical failure,
// 4 identity violation (barrier), 5 fit non-convergence.

#include <clocale>
#include <cmath>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdwell/qdwell.hpp"

namespace {

using namespace qdwell;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIdentity = 4;
constexpr int kExitFit = 5;

Complex parse_complex(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) return {parse_float(s), 0.0};
  return {parse_float(s.substr(0, comma)), parse_float(s.substr(comma + 1))};
}

std::pair<double, double> parse_window(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw InputError("window must be given as lo,hi");
  return {parse_float(s.substr(0, comma)), parse_float(s.substr(comma + 1))};
}

void check_known_keys(const IniConfig& cfg) {
  const std::map<std::string, std::set<std::string>> allowed = {
      {"channel", {"mu", "threshold", "l", "units"}},
      {"model", {"type", "a_re", "a_im", "r_e", "e_r", "gamma", "table"}},
      {"grid", {"emin", "emax", "n", "spacing"}},
      {"output", {"path", "time_unit"}},
  };
  for (const auto& [section, keys] : cfg.sections()) {
    const auto it = allowed.find(section);
    if (it == allowed.end())
      throw InputError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : keys)
      if (!it->second.count(key))
        throw InputError("config: unknown key [" + section + "] " + key);
  }
}

ChannelConfig channel_from_config(const IniConfig& cfg) {
  ChannelConfig ch;
  ch.reduced_mass = cfg.get_double("channel", "mu");
  ch.threshold_energy =
      cfg.has("channel", "threshold") ? cfg.get_double("channel", "threshold")
                                      : 0.0;
  ch.partial_wave = cfg.has("channel", "l") ? cfg.get_int("channel", "l") : 0;
  const std::string units = cfg.get_or("channel", "units", "natural");
  if (units == "natural")
    ch.units = UnitSystem::natural;
  else if (units == "mev_fm")
    ch.units = UnitSystem::mev_fm;
  else
    throw InputError("config: units must be natural or mev_fm");
  ch.validate();
  return ch;
}

TMatrixModel model_from_config(const IniConfig& cfg, const ChannelConfig& ch) {
  const std::string type = cfg.get("model", "type");
  const auto require_only = [&](std::set<std::string> keys) {
    keys.insert("type");
    for (const auto& [key, value] : cfg.sections().at("model"))
      if (!keys.count(key))
        throw InputError("config: key '" + key +
                         "' does not belong to model type " + type);
  };
  if (type == "zero_range" || type == "effective_range") {
    ComplexScatteringLength a{
        length_to_internal(cfg.get_double("model", "a_re"), ch.units),
        length_to_internal(
            cfg.has("model", "a_im") ? cfg.get_double("model", "a_im") : 0.0,
            ch.units)};
    if (!a.absorptive_convention_ok())
      std::cerr << "warning: a_im < 0 describes gain, not absorption\n";
    if (type == "zero_range") {
      require_only({"a_re", "a_im"});
      return ZeroRangeModel{a};
    }
    require_only({"a_re", "a_im", "r_e"});
    return EffectiveRangeModel{
        a, length_to_internal(cfg.get_double("model", "r_e"), ch.units)};
  }
  if (type == "breit_wigner") {
    require_only({"e_r", "gamma"});
    BreitWignerParams p{cfg.get_double("model", "e_r"),
                        cfg.get_double("model", "gamma")};
    p.validate();
    return BreitWignerModel{p};
  }
  if (type == "tabulated") {
    require_only({"table"});
    return TabulatedModel{load_t_table(cfg.get("model", "table"))};
  }
  throw InputError("config: unknown model type '" + type + "'");
}

GridSpec grid_from_config(const IniConfig& cfg) {
  GridSpec g;
  g.e_min = cfg.get_double("grid", "emin");
  g.e_max = cfg.get_double("grid", "emax");
  g.n_points = cfg.get_int("grid", "n");
  const std::string spacing = cfg.get_or("grid", "spacing", "linear");
  if (spacing == "linear")
    g.spacing = GridSpacing::linear;
  else if (spacing == "log")
    g.spacing = GridSpacing::log_from_threshold;
  else
    throw InputError("config: spacing must be linear or log");
  return g;
}

TimeUnit time_unit_from_string(const std::string& s) {
  if (s == "hbar_per_energy") return TimeUnit::hbar_per_energy;
  if (s == "seconds") return TimeUnit::seconds;
  if (s == "fm_per_c") return TimeUnit::fm_per_c;
  throw InputError("config: unknown time_unit '" + s + "'");
}

int cmd_spectrum(const std::string& config_path, std::string out_path) {
  IniConfig cfg;
  ChannelConfig ch;
  GridSpec gspec;
  TimeUnit tu = TimeUnit::hbar_per_energy;
  std::vector<double> grid;
  TMatrixModel model;
  try {
    cfg = IniConfig::parse_file(config_path);
    check_known_keys(cfg);
    ch = channel_from_config(cfg);
    model = model_from_config(cfg, ch);
    gspec = grid_from_config(cfg);
    grid = energy_grid(gspec);
    tu = time_unit_from_string(
        cfg.get_or("output", "time_unit", "hbar_per_energy"));
    time_from_internal(0.0, ch.units, tu);  // reject inconsistent unit pairs
    if (out_path.empty()) out_path = cfg.get_or("output", "path", "");
    if (out_path.empty())
      throw InputError("config: no output path ([output] path or --out)");
    for (double e : grid)
      if (e < 0.0 && !supports_negative_energy(model))
        throw InputError("grid extends to E < 0 but the model cannot");
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInput;
  }

  DelaySpectrum spec;
  try {
    spec = spectrum(model, grid, ch);
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumerical;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInput;
  }

  CsvWriter w;
  w.meta("config_hash", cfg.hash());
  w.meta("units",
         ch.units == UnitSystem::mev_fm ? "mev_fm" : "natural");
  w.meta("time_unit", cfg.get_or("output", "time_unit", "hbar_per_energy"));
  if (!spec.flagged_poles.empty()) {
    std::string poles;
    for (std::size_t i = 0; i < spec.flagged_poles.size(); ++i) {
      if (i) poles += ';';
      poles += format_float(spec.flagged_poles[i]);
    }
    w.meta("flagged_poles", poles);
  }
  const std::vector<std::string> cols = {"E",  "tau_phase", "tau_si",
                                         "tau_dwell", "A", "dos_diff"};
  w.header(cols);
  for (const auto& p : spec.points) {
    const double f = time_from_internal(1.0, ch.units, tu);
    w.row(std::vector<double>{p.E, p.tau_phase * f, p.tau_si * f,
                              p.tau_dwell * f, p.A_factor, p.dos_diff});
  }
  try {
    w.write_file(out_path);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

int cmd_barrier(const std::string& v0_str, double length, double mass,
                double emin, double emax, int n,
                const std::string& out_path) {
  BarrierSpec spec;
  std::vector<double> grid;
  try {
    spec.v0 = parse_complex(v0_str);
    spec.length = length;
    spec.mass = mass;
    spec.validate();
    grid = energy_grid({emin, emax, n, GridSpacing::linear});
    for (double e : grid) {
      if (!(e > 0.0))
        throw InputError("barrier grid must be strictly positive");
      if (std::abs(e - spec.v0.real()) <= 1e-6 * std::abs(spec.v0))
        throw InputError("grid contains a barrier-top point");
    }
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInput;
  }

  std::vector<BarrierSolution> sols;
  try {
    sols = scan(spec, grid);
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumerical;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInput;
  }

  CsvWriter w;
  w.meta("v0", format_float(spec.v0.real()) + "," +
                   format_float(spec.v0.imag()));
  w.meta("length", format_float(spec.length));
  w.meta("mass", format_float(spec.mass));
  w.header(std::vector<std::string>{"E", "re_R", "im_R", "re_T", "im_T",
                                    "tau_dwell", "tau_phase", "tau_si",
                                    "identity_residual",
                                    "unitarity_deficit"});
  bool identity_ok = true;
  for (const auto& s : sols) {
    w.row(std::vector<double>{s.E, s.R_amp.real(), s.R_amp.imag(),
                              s.T_amp.real(), s.T_amp.imag(), s.tau_dwell,
                              s.tau_phase, s.tau_si, s.identity_residual,
                              s.unitarity_deficit});
    const double bound =
        1e-8 * std::max(std::abs(s.tau_phase), s.free_transit);
    if (std::abs(s.identity_residual) > bound) identity_ok = false;
  }
  try {
    w.write_file(out_path);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInput;
  }
  if (!identity_ok) {
    std::cerr << "identity violation: |tau_phase - tau_dwell - tau_si| "
                 "exceeds 1e-8 scale\n";
    return kExitIdentity;
  }
  return kExitOk;
}

int cmd_fit(const std::string& in_path, const std::string& column,
            const std::string& window_str) {
  ResonanceFit fit;
  try {
    const auto [lo, hi] = parse_window(window_str);
    const CsvTable table = read_csv_file(in_path);
    const auto E = table.column_values("E");
    const auto y = table.column_values(column);
    if (E.empty()) throw InputError("fit: input has no rows");
    if (hi < E.front() || lo > E.back())
      throw InputError("fit: window outside the data range");
    fit = fit_lorentzian(E, y, lo, hi);
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumerical;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInput;
  }
  std::cout << "E_r = " << format_float(fit.e_res) << "\n"
            << "Gamma = " << format_float(fit.gamma) << "\n"
            << "amplitude = " << format_float(fit.amplitude) << "\n"
            << "background = " << format_float(fit.background) << "\n"
            << "residual_norm = " << format_float(fit.residual_norm) << "\n"
            << "converged = " << (fit.converged ? "true" : "false") << "\n"
            << "iterations = " << fit.iterations << "\n";
  if (!fit.converged) {
    std::cerr << "fit did not converge: " << fit.diagnostic << "\n";
    return kExitFit;
  }
  return kExitOk;
}

int cmd_well(const std::string& depth_str, double radius, int l, double mu,
             double emin, double emax, int n, const std::string& out_path) {
  SquareWellPotential well;
  ChannelConfig ch;
  std::vector<double> grid;
  try {
    well.depth = parse_complex(depth_str);
    well.radius = radius;
    if (!(radius > 0.0)) throw InputError("well: radius must be positive");
    ch.reduced_mass = mu;
    ch.partial_wave = l;
    ch.validate();
    grid = energy_grid({emin, emax, n, GridSpacing::linear});
    for (double e : grid)
      if (!(e > 0.0))
        throw InputError("well grid must be strictly positive");
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInput;
  }

  try {
    const RadialPotential pot = well;
    const auto shifts = phase_shift_spectrum(pot, l, grid, ch);

    std::vector<Complex> t(shifts.size());
    for (std::size_t i = 0; i < shifts.size(); ++i) {
      const double k = std::sqrt(2.0 * mu * grid[i]);
      t[i] = t_from_delta(shifts[i].delta, k, mu);
    }
    const auto dt = derivative_series<Complex>(grid, t);

    // analytic reference for the square well, unwrapped like the solve
    std::vector<double> delta_analytic(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double k = std::sqrt(2.0 * mu * grid[i]);
      const Complex kp = std::sqrt(2.0 * mu * (grid[i] + well.depth));
      const Complex da =
          -k * radius + std::atan(k / kp * std::tan(kp * radius));
      delta_analytic[i] = da.real();
    }
    unwrap_inplace(delta_analytic, constants::pi);

    CsvWriter w;
    w.meta("depth", format_float(well.depth.real()) + "," +
                        format_float(well.depth.imag()));
    w.meta("radius", format_float(radius));
    w.meta("l", std::to_string(l));
    w.meta("mu", format_float(mu));
    w.header(std::vector<std::string>{"E", "delta_re", "delta_im",
                                      "tau_phase", "tau_si", "tau_dwell",
                                      "delta_analytic"});
    double max_dev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Wavenumber kin = wavenumber(grid[i], ch);
      const AmplitudePoint ap =
          amplitude_from_t(grid[i], t[i], dt[i], ch);
      const double tp = phase_time_delay(ap, kin, ch);
      const double ts = self_interference_delay(ap, kin, ch);
      w.row(std::vector<double>{grid[i], shifts[i].delta.real(),
                                shifts[i].delta.imag(), tp, ts, tp - ts,
                                delta_analytic[i]});
      max_dev = std::max(
          max_dev, circular_distance(shifts[i].delta.real(),
                                     delta_analytic[i], constants::pi));
    }
    w.write_file(out_path);
    std::cout << "max_delta_deviation = " << format_float(max_dev) << "\n";
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumerical;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  CLI::App app{"scattering time delays: spectra, barrier scans, fits"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  auto* spectrum_cmd =
      app.add_subcommand("spectrum", "delay spectrum from a run config");
  spectrum_cmd->add_option("--config", config_path, "INI run configuration")
      ->required();
  spectrum_cmd->add_option("--out", out_path, "output CSV path");

  std::string v0_str{"0"};
  double length = 1.0, mass = 1.0, emin = 0.0, emax = 0.0;
  int npts = 0;
  std::string barrier_out;
  auto* barrier_cmd =
      app.add_subcommand("barrier", "rectangular-barrier time scan");
  barrier_cmd->add_option("--v0", v0_str, "barrier height re[,im]")
      ->required();
  barrier_cmd->add_option("--length", length, "barrier width")->required();
  barrier_cmd->add_option("--mass", mass, "particle mass")->required();
  barrier_cmd->add_option("--emin", emin)->required();
  barrier_cmd->add_option("--emax", emax)->required();
  barrier_cmd->add_option("--n", npts)->required();
  barrier_cmd->add_option("--out", barrier_out)->required();

  std::string fit_in, fit_column, fit_window;
  auto* fit_cmd = app.add_subcommand("fit", "Lorentzian peak fit on a CSV");
  fit_cmd->add_option("--in", fit_in)->required();
  fit_cmd->add_option("--column", fit_column)->required();
  fit_cmd->add_option("--window", fit_window, "lo,hi")->required();

  std::string depth_str{"0"};
  double radius = 1.0, mu = 1.0;
  int l = 0;
  std::string well_out;
  auto* well_cmd =
      app.add_subcommand("well", "square-well phase shifts and delays");
  well_cmd->add_option("--depth", depth_str, "well depth re[,im]")
      ->required();
  well_cmd->add_option("--radius", radius)->required();
  well_cmd->add_option("--l", l);
  well_cmd->add_option("--mu", mu);
  well_cmd->add_option("--emin", emin)->required();
  well_cmd->add_option("--emax", emax)->required();
  well_cmd->add_option("--n", npts)->required();
  well_cmd->add_option("--out", well_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  if (spectrum_cmd->parsed()) return cmd_spectrum(config_path, out_path);
  if (barrier_cmd->parsed())
    return cmd_barrier(v0_str, length, mass, emin, emax, npts, barrier_out);
  if (fit_cmd->parsed()) return cmd_fit(fit_in, fit_column, fit_window);
  if (well_cmd->parsed())
    return cmd_well(depth_str, radius, l, mu, emin, emax, npts, well_out);
  return kExitInput;
}
