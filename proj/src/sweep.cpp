#include "acmech/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "acmech/constants.hpp"
#include "acmech/format.hpp"
#include "acmech/lamb.hpp"

namespace acmech::sweep {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json::json_pointer pointer_for(const std::string& dotted) {
  std::string p = "/";
  for (char c : dotted) p += (c == '.') ? '/' : c;
  return json::json_pointer(p);
}

json& locate(json& config, const std::string& dotted) {
  try {
    return config.at(pointer_for(dotted));
  } catch (const json::exception&) {
    throw std::invalid_argument("unknown config key: " + dotted);
  }
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

void set_number(json& config, const std::string& dotted, double value) {
  if (dotted == "bath.T_K") {
    config["bath"]["T_x_K"] = value;
    config["bath"]["T_m_K"] = value;
    config["bath"]["T_p_K"] = value;
    return;
  }
  json& ref = locate(config, dotted);
  if (!ref.is_number())
    throw std::invalid_argument("config key " + dotted + " is not numeric");
  ref = value;
}

void merge_into(json& dst, const json& src, const std::string& path) {
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string here = path.empty() ? it.key() : path + "." + it.key();
    if (!dst.contains(it.key())) throw std::invalid_argument("unknown config key: " + here);
    json& slot = dst[it.key()];
    if (slot.is_object() && it->is_object()) {
      merge_into(slot, *it, here);
    } else if (same_kind(slot, *it)) {
      slot = *it;
    } else {
      throw std::invalid_argument("config key " + here + " has the wrong type");
    }
  }
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double num(const json& config, const std::string& dotted) {
  const json& j = const_cast<json&>(config).at(pointer_for(dotted));
  return j.get<double>();
}

lamb::ElasticMaterial material_from(const json& config) {
  lamb::ElasticMaterial mat;
  mat.c_l = num(config, "material.c_l_m_s");
  mat.c_t = num(config, "material.c_t_m_s");
  mat.rho = num(config, "material.rho_kg_m3");
  return mat;
}

// resolved parameters and regime report rendered as CSV header comments
std::vector<std::string> header_comments(const json& config, const Resolved& r) {
  std::vector<std::string> out;
  auto add = [&](const std::string& k, double v) { out.push_back("param " + k + " = " + format_g9(v)); };
  add("magnet.radius_m", r.magnet.radius);
  add("magnet.density_kg_m3", r.magnet.density);
  add("magnet.saturation_magnetization_A_m", r.magnet.saturation_magnetization);
  add("magnet.gyro_ratio_rad_sT", r.magnet.gyro_ratio);
  add("magnet.omega_p_rad_s", r.magnet.omega_p);
  add("magnet.g_rad_s", r.magnet.magnon_phonon_g);
  out.push_back(std::string("param field.source = ") + (r.tuned ? "tuned" : "explicit"));
  add("field.B0_T", r.drive.B0);
  add("field.b_g_T_m", r.drive.gradient);
  add("field.omega_d_rad_s", r.drive.omega_d);
  add("bath.omega_x_rad_s", r.baths.omega_x);
  add("bath.Q_x", r.baths.Q_x);
  add("bath.gamma_m_rad_s", r.baths.gamma_m);
  add("bath.Q_p", r.baths.Q_p);
  add("bath.T_x_K", r.baths.T_x);
  add("bath.T_m_K", r.baths.T_m);
  add("bath.T_p_K", r.baths.T_p);
  try {
    const RwaModel rm = build_rwa_model(r.magnet, r.drive, r.baths);
    add("derived.chi", rm.modes.chi);
    add("derived.omega_1_rad_s", rm.modes.omega_1);
    add("derived.omega_2_rad_s", rm.modes.omega_2);
    add("derived.G_x1_rad_s", rm.G_x1);
    add("derived.G_x2_rad_s", rm.G_x2);
    add("derived.gamma_2_rad_s", rm.rates.gamma_2());
    add("derived.n_x", rm.n_x);
    add("derived.cooperativity", rm.cooperativity());
    add("derived.quantum_cooperativity", rm.quantum_cooperativity());
  } catch (const std::exception& e) {
    out.push_back(std::string("derived: unavailable (") + e.what() + ")");
  }
  const RegimeReport rep = validate_regime(r.magnet, r.drive, r.baths);
  for (const auto& c : rep.conditions)
    out.push_back("regime " + c.name + " ratio = " + format_g9(c.ratio) + " threshold = " +
                  format_g9(c.threshold) + (c.pass ? " pass" : " FAIL"));
  (void)config;
  return out;
}

const std::vector<std::string>& allowed_observables() {
  static const std::vector<std::string> names = {
      "G_ratio",        "omega_x_over_gamma2",    "cooperativity",
      "quantum_cooperativity", "occupation_ss",   "T_x",
      "psd"};
  return names;
}

}  // namespace

json default_config() {
  json c;
  c["magnet"] = {{"radius_m", 100e-9},
                 {"density_kg_m3", 5170.0},
                 {"saturation_magnetization_A_m", 5.87e5},
                 {"gyro_ratio_rad_sT", 1.76e11},
                 {"omega_p_rad_s", 0.0},
                 {"g_rad_s", 0.0},
                 {"effective_mass_kg", 0.0},
                 {"acoustics", "calibrated"},
                 {"acoustic_mode_n", 1}};
  c["material"] = {{"c_l_m_s", 7209.0}, {"c_t_m_s", 3843.0}, {"rho_kg_m3", 5170.0}};
  c["field"] = {{"B0_T", 0.0}, {"b_g_T_m", 2000.0}, {"omega_d_rad_s", 0.0}, {"chi", 0.01}};
  c["bath"] = {{"omega_x_rad_s", 2 * M_PI * 200e3},
               {"Q_x", 1e5},
               {"gamma_m_rad_s", 2 * M_PI * 1e6},
               {"Q_p", 1e6},
               {"T_x_K", 300.0},
               {"T_m_K", 300.0},
               {"T_p_K", 300.0}};
  c["sweep"] = {{"axis1", {{"key", "bath.Q_p"}, {"from", 1e4}, {"to", 1e10}, {"points", 200}, {"spacing", "log"}}},
                {"axis2", {{"key", ""}, {"from", 0.0}, {"to", 0.0}, {"points", 0}, {"spacing", "log"}}},
                {"observables",
                 json::array({"G_ratio", "omega_x_over_gamma2", "cooperativity",
                              "quantum_cooperativity", "occupation_ss", "T_x"})}};
  c["psd"] = {{"b_g_list_T_m", json::array({0.0, 2000.0, 20000.0})}, {"points", 2001}};
  c["modes"] = {{"n_max", 5}};
  c["output"] = {{"path", ""}, {"emit_plot_script", false}};
  return c;
}

void merge_config(json& config, const json& file) {
  if (!file.is_object()) throw std::invalid_argument("config file must hold a JSON object");
  merge_into(config, file, "");
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  try {
    return json::parse(in, nullptr, true, true);  // comments allowed
  } catch (const json::exception& e) {
    throw std::invalid_argument("malformed config " + path + ": " + e.what());
  }
}

void apply_override(json& config, const std::string& key_eq_value) {
  const auto eq = key_eq_value.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like key=value: " + key_eq_value);
  const std::string key = key_eq_value.substr(0, eq);
  const std::string raw = key_eq_value.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;  // unquoted string such as "log" or "lamb"
  }
  if (key == "bath.T_K") {
    if (!value.is_number()) throw std::invalid_argument("bath.T_K needs a numeric value");
    set_number(config, key, value.get<double>());
    return;
  }
  json& ref = locate(config, key);
  if (!same_kind(ref, value))
    throw std::invalid_argument("config key " + key + " has the wrong type in: " + key_eq_value);
  ref = value;
}

Resolved resolve_config(const json& config) {
  Resolved r;
  r.magnet.radius = num(config, "magnet.radius_m");
  r.magnet.density = num(config, "magnet.density_kg_m3");
  r.magnet.saturation_magnetization = num(config, "magnet.saturation_magnetization_A_m");
  r.magnet.gyro_ratio = num(config, "magnet.gyro_ratio_rad_sT");
  if (!(r.magnet.radius > 0.0)) throw std::invalid_argument("magnet.radius_m must be positive");

  const double omega_p_cfg = num(config, "magnet.omega_p_rad_s");
  if (omega_p_cfg > 0.0) {
    r.magnet.omega_p = omega_p_cfg;
  } else {
    const std::string source = config["magnet"]["acoustics"].get<std::string>();
    if (source == "calibrated") {
      r.magnet.omega_p = kOmegaPRadiusProduct / r.magnet.radius;
    } else if (source == "lamb") {
      const int n = config["magnet"]["acoustic_mode_n"].get<int>();
      r.magnet.omega_p = lamb::find_modes(material_from(config), r.magnet.radius, n).back().omega_p;
    } else {
      throw std::invalid_argument("magnet.acoustics must be calibrated or lamb");
    }
  }
  const double g_cfg = num(config, "magnet.g_rad_s");
  r.magnet.magnon_phonon_g = g_cfg > 0.0 ? g_cfg : kGSqrtRadiusProduct / std::sqrt(r.magnet.radius);
  const double m_eff = num(config, "magnet.effective_mass_kg");
  if (m_eff > 0.0) r.magnet.effective_mass = m_eff;

  r.baths.omega_x = num(config, "bath.omega_x_rad_s");
  r.baths.Q_x = num(config, "bath.Q_x");
  r.baths.gamma_m = num(config, "bath.gamma_m_rad_s");
  r.baths.Q_p = num(config, "bath.Q_p");
  r.baths.T_x = num(config, "bath.T_x_K");
  r.baths.T_m = num(config, "bath.T_m_K");
  r.baths.T_p = num(config, "bath.T_p_K");

  const double B0 = num(config, "field.B0_T");
  const double omega_d = num(config, "field.omega_d_rad_s");
  const double gradient = num(config, "field.b_g_T_m");
  r.chi_target = num(config, "field.chi");
  if (B0 > 0.0 && omega_d > 0.0) {
    r.drive = FieldDrive{B0, gradient, omega_d};
  } else if (B0 == 0.0 && omega_d == 0.0) {
    r.drive = tune_fields(r.magnet, r.chi_target, r.baths.omega_x, gradient);
    r.tuned = true;
  } else {
    throw std::invalid_argument("set both field.B0_T and field.omega_d_rad_s, or neither (tune)");
  }
  return r;
}

std::vector<double> SweepAxis::values() const {
  if (points < 1) throw std::invalid_argument("axis points must be >= 1");
  if (points == 1) return {from};
  if (log_spacing && (!(from > 0.0) || !(to > 0.0)))
    throw std::invalid_argument("log axis needs positive endpoints");
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / (points - 1);
    v[i] = log_spacing ? from * std::pow(to / from, f) : from + (to - from) * f;
  }
  v.back() = to;
  return v;
}

SweepSpec sweep_spec_from_config(const json& config) {
  SweepSpec spec;
  spec.base = config;
  auto axis_from = [&](const std::string& section) {
    SweepAxis ax;
    ax.key = config["sweep"][section]["key"].get<std::string>();
    ax.from = num(config, "sweep." + section + ".from");
    ax.to = num(config, "sweep." + section + ".to");
    ax.points = config["sweep"][section]["points"].get<int>();
    const std::string spacing = config["sweep"][section]["spacing"].get<std::string>();
    if (spacing != "log" && spacing != "linear")
      throw std::invalid_argument("axis spacing must be log or linear");
    ax.log_spacing = spacing == "log";
    return ax;
  };
  SweepAxis a1 = axis_from("axis1");
  if (a1.key.empty()) throw std::invalid_argument("sweep.axis1.key is required");
  spec.axes.push_back(a1);
  SweepAxis a2 = axis_from("axis2");
  if (!a2.key.empty() && a2.points >= 1) spec.axes.push_back(a2);

  for (const auto& obs : config["sweep"]["observables"]) {
    const std::string name = obs.get<std::string>();
    const auto& ok = allowed_observables();
    if (std::find(ok.begin(), ok.end(), name) == ok.end())
      throw std::invalid_argument("unknown observable: " + name);
    spec.observables.push_back(name);
  }
  if (spec.observables.empty()) throw std::invalid_argument("no observables selected");
  spec.out_path = config["output"]["path"].get<std::string>();
  return spec;
}

std::string Table::to_csv() const {
  std::ostringstream os;
  for (const auto& c : comments) os << "# " << c << '\n';
  for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

PeakSummary find_peaks(const gauss::SpectrumEvaluator& S, double omega_x, double gamma_2,
                       double G_x2) {
  PeakSummary out;
  // window capped below 0.75 omega_x so the image doublet around -omega_x
  // (weight nbar+1) can never masquerade as a split peak
  const double cap = std::min(std::max(10.0 * gamma_2, 6.0 * std::abs(G_x2)), 0.75 * omega_x);
  const double lo = omega_x - cap, hi = omega_x + cap;
  const int n = 4001;
  const double dx = (hi - lo) / (n - 1);
  std::vector<double> val(n);
  for (int i = 0; i < n; ++i) val[i] = S(lo + i * dx);
  const double vmax = *std::max_element(val.begin(), val.end());

  auto golden_max = [&](double a, double b) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = S(x1), f2 = S(x2);
    for (int it = 0; it < 90; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + r * (b - a);
        f2 = S(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - r * (b - a);
        f1 = S(x1);
      }
    }
    return (a + b) / 2;
  };

  std::vector<std::pair<double, double>> peaks;  // height, position
  for (int i = 1; i + 1 < n; ++i) {
    if (val[i] >= val[i - 1] && val[i] >= val[i + 1] && val[i] > vmax / 50) {
      const double pos = golden_max(lo + (i - 1) * dx, lo + (i + 1) * dx);
      peaks.emplace_back(S(pos), pos);
      while (i + 1 < n && val[i + 1] == val[i]) ++i;  // flat-top duplicates
    }
  }
  std::sort(peaks.rbegin(), peaks.rend());
  std::vector<std::pair<double, double>> kept;
  for (const auto& p : peaks) {
    bool dup = false;
    for (const auto& k : kept) dup = dup || std::abs(p.second - k.second) < 2 * dx;
    if (!dup) kept.push_back(p);
  }
  out.count = static_cast<int>(kept.size());
  if (kept.empty()) {
    out.peak_lo = out.peak_hi = out.fwhm = out.height = kNaN;
    return out;
  }
  out.height = kept[0].first;
  out.peak_lo = out.peak_hi = kept[0].second;
  if (kept.size() >= 2) {
    out.peak_lo = std::min(kept[0].second, kept[1].second);
    out.peak_hi = std::max(kept[0].second, kept[1].second);
    out.splitting = out.peak_hi - out.peak_lo;
  }

  // FWHM of the tallest peak on the continuous spectrum
  const double half = out.height / 2;
  auto crossing = [&](double sign) {
    double step = dx / 4;
    double x = kept[0].second;
    double prev = x;
    while (x > lo && x < hi) {
      prev = x;
      x += sign * step;
      step *= 1.6;
      if (S(x) < half) break;
    }
    if (!(S(x) < half)) return kNaN;
    double a = prev, b = x;  // S(a) >= half > S(b)
    for (int it = 0; it < 100; ++it) {
      const double m = (a + b) / 2;
      (S(m) >= half ? a : b) = m;
    }
    return (a + b) / 2;
  };
  const double left = crossing(-1.0);
  const double right = crossing(+1.0);
  out.fwhm = right - left;
  return out;
}

namespace {

struct ObservableLayout {
  std::vector<std::string> columns;
  bool wants_model = false;
  bool wants_occupation = false;
  bool wants_psd = false;
};

ObservableLayout layout_for(const std::vector<std::string>& observables) {
  ObservableLayout lay;
  for (const auto& name : observables) {
    if (name == "G_ratio" || name == "omega_x_over_gamma2" || name == "cooperativity" ||
        name == "quantum_cooperativity")
      lay.wants_model = true;
    if (name == "occupation_ss" || name == "T_x") lay.wants_occupation = true;
    if (name == "psd") {
      lay.wants_psd = true;
      lay.columns.insert(lay.columns.end(),
                         {"psd_peak_count", "psd_peak_lo_rad_s", "psd_peak_hi_rad_s",
                          "psd_splitting_rad_s", "psd_fwhm_rad_s", "psd_height"});
      continue;
    }
    lay.columns.push_back(name == "T_x" ? "T_x_K" : name);
  }
  return lay;
}

}  // namespace

Table run_sweep(const SweepSpec& spec, int workers) {
  const Resolved base = resolve_config(spec.base);
  const ObservableLayout lay = layout_for(spec.observables);

  std::vector<std::vector<double>> axis_values;
  for (const auto& ax : spec.axes) axis_values.push_back(ax.values());
  const int n1 = static_cast<int>(axis_values[0].size());
  const int n2 = spec.axes.size() > 1 ? static_cast<int>(axis_values[1].size()) : 1;
  const int total = n1 * n2;

  Table table;
  table.comments.push_back("acoustomech sweep");
  for (const auto& ax : spec.axes)
    table.comments.push_back("axis " + ax.key + " " + format_g9(ax.from) + " .. " +
                             format_g9(ax.to) + " points " + std::to_string(ax.points) +
                             (ax.log_spacing ? " log" : " linear"));
  auto hdr = header_comments(spec.base, base);
  table.comments.insert(table.comments.end(), hdr.begin(), hdr.end());

  for (const auto& ax : spec.axes) table.columns.push_back(ax.key);
  table.columns.insert(table.columns.end(), lay.columns.begin(), lay.columns.end());
  table.columns.push_back("status");

  table.rows.assign(total, {});
  parallel_for(total, workers, [&](int idx) {
    const int i1 = idx / n2, i2 = idx % n2;
    json point = spec.base;
    set_number(point, spec.axes[0].key, axis_values[0][i1]);
    if (spec.axes.size() > 1) set_number(point, spec.axes[1].key, axis_values[1][i2]);

    std::vector<std::string> row;
    row.push_back(format_g9(axis_values[0][i1]));
    if (spec.axes.size() > 1) row.push_back(format_g9(axis_values[1][i2]));

    std::string status = "ok";
    const Resolved r = resolve_config(point);
    const RwaModel rm = build_rwa_model(r.magnet, r.drive, r.baths);
    const double gamma_2 = rm.rates.gamma_2();

    double occupation = kNaN;
    Eigen::MatrixXd sigma_ss;
    bool have_sigma = false;
    if (lay.wants_occupation || lay.wants_psd) {
      try {
        auto dd = gauss::build_drift_diffusion(rm.model, rm.channels);
        sigma_ss = gauss::lyapunov_steady_state(dd.A, dd.D);
        occupation = (sigma_ss(0, 0) + sigma_ss(1, 1)) / 2 - 0.5;
        have_sigma = true;
      } catch (const gauss::NotHurwitz&) {
        status = "not_hurwitz";
      }
    }

    for (const auto& name : spec.observables) {
      if (name == "G_ratio") {
        row.push_back(format_g9(2 * std::abs(rm.G_x2) / gamma_2));
      } else if (name == "omega_x_over_gamma2") {
        row.push_back(format_g9(r.baths.omega_x / gamma_2));
      } else if (name == "cooperativity") {
        row.push_back(format_g9(rm.cooperativity()));
      } else if (name == "quantum_cooperativity") {
        row.push_back(format_g9(rm.quantum_cooperativity()));
      } else if (name == "occupation_ss") {
        row.push_back(format_g9(occupation));
      } else if (name == "T_x") {
        row.push_back(format_g9(constants::hbar * r.baths.omega_x * occupation / constants::k_B));
      } else if (name == "psd") {
        PeakSummary pk;
        if (have_sigma) {
          auto dd = gauss::build_drift_diffusion(rm.model, rm.channels);
          Eigen::VectorXd v = Eigen::VectorXd::Zero(6);
          v(0) = std::sqrt(2.0) * zero_point_motion(r.magnet, r.baths.omega_x);
          gauss::SpectrumEvaluator eval(dd.A, sigma_ss, v);
          pk = find_peaks(eval, r.baths.omega_x, gamma_2, rm.G_x2);
        } else {
          pk.count = 0;
          pk.peak_lo = pk.peak_hi = pk.splitting = pk.fwhm = pk.height = kNaN;
        }
        row.push_back(std::to_string(pk.count));
        row.push_back(format_g9(pk.peak_lo));
        row.push_back(format_g9(pk.peak_hi));
        row.push_back(format_g9(pk.splitting));
        row.push_back(format_g9(pk.fwhm));
        row.push_back(format_g9(pk.height));
      }
    }
    row.push_back(status);
    table.rows[idx] = std::move(row);
  });
  return table;
}

PsdResult run_psd(const json& config, int workers) {
  const Resolved base = resolve_config(config);
  std::vector<double> gradients;
  for (const auto& bg : config["psd"]["b_g_list_T_m"]) gradients.push_back(bg.get<double>());
  if (gradients.empty()) throw std::invalid_argument("psd.b_g_list_T_m is empty");
  const int points = config["psd"]["points"].get<int>();
  if (points < 101) throw std::invalid_argument("psd.points must be at least 101");

  // one model per gradient; gamma_2 is gradient-independent
  std::vector<RwaModel> models;
  double max_G = 0.0;
  for (double bg : gradients) {
    json cfg = config;
    set_number(cfg, "field.b_g_T_m", bg);
    const Resolved r = resolve_config(cfg);
    models.push_back(build_rwa_model(r.magnet, r.drive, r.baths));
    max_G = std::max(max_G, std::abs(models.back().G_x2));
  }
  const double omega_x = base.baths.omega_x;
  const double gamma_2 = models.front().rates.gamma_2();
  double span = std::max(10.0 * gamma_2, 3.0 * 2.0 * max_G);
  span = std::min(span, 0.98 * omega_x);  // keep the grid at positive frequencies
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i)
    grid[i] = omega_x - span + 2 * span * static_cast<double>(i) / (points - 1);

  const double x0 = zero_point_motion(base.magnet, base.baths.omega_x);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(6);
  v(0) = std::sqrt(2.0) * x0;

  std::vector<std::vector<double>> curves(gradients.size(), std::vector<double>(points, kNaN));
  std::vector<PeakSummary> peaks(gradients.size());
  parallel_for(static_cast<int>(gradients.size()), workers, [&](int k) {
    peaks[k].b_g = gradients[k];
    auto dd = gauss::build_drift_diffusion(models[k].model, models[k].channels);
    Eigen::MatrixXd sigma;
    try {
      sigma = gauss::lyapunov_steady_state(dd.A, dd.D);
    } catch (const gauss::NotHurwitz&) {
      peaks[k].stable = false;
      peaks[k].peak_lo = peaks[k].peak_hi = peaks[k].fwhm = peaks[k].height = kNaN;
      return;
    }
    gauss::SpectrumEvaluator eval(dd.A, sigma, v);
    for (int i = 0; i < points; ++i) curves[k][i] = eval(grid[i]);
    PeakSummary pk = find_peaks(eval, omega_x, gamma_2, models[k].G_x2);
    pk.b_g = gradients[k];
    peaks[k] = pk;
  });

  PsdResult res;
  res.peaks = peaks;
  res.table.comments.push_back("acoustomech psd");
  auto hdr = header_comments(config, base);
  res.table.comments.insert(res.table.comments.end(), hdr.begin(), hdr.end());
  res.table.comments.push_back("grid omega_x +- " + format_g9(span) + " rad/s, " +
                               std::to_string(points) + " points");
  for (const auto& pk : peaks) {
    std::string line = "peaks b_g = " + format_g9(pk.b_g) + ": ";
    if (!pk.stable) {
      line += "not_hurwitz";
    } else {
      line += "count " + std::to_string(pk.count) + " tallest " + format_g9(pk.peak_hi) +
              " fwhm " + format_g9(pk.fwhm) + " splitting " + format_g9(pk.splitting) +
              " height " + format_g9(pk.height);
    }
    res.table.comments.push_back(line);
  }
  res.table.columns.push_back("omega_rad_s");
  for (double bg : gradients) res.table.columns.push_back("Sxx_bg_" + format_g9(bg));
  for (int i = 0; i < points; ++i) {
    std::vector<std::string> row;
    row.push_back(format_g9(grid[i]));
    for (size_t k = 0; k < gradients.size(); ++k) row.push_back(format_g9(curves[k][i]));
    res.table.rows.push_back(std::move(row));
  }
  return res;
}

std::string cmd_tune(const json& config) {
  const Resolved r = resolve_config(config);
  const FieldDrive d =
      r.tuned ? r.drive : tune_fields(r.magnet, r.chi_target, r.baths.omega_x, r.drive.gradient);
  const double omega_m = kittel_frequency(r.magnet, d.B0);
  const auto modes = bogoliubov(omega_m, r.magnet.omega_p, r.magnet.magnon_phonon_g);
  std::ostringstream os;
  os << "radius_m        " << format_g9(r.magnet.radius) << '\n'
     << "omega_p_rad_s   " << format_g9(r.magnet.omega_p) << '\n'
     << "g_rad_s         " << format_g9(r.magnet.magnon_phonon_g) << '\n'
     << "chi             " << format_g9(modes.chi) << '\n'
     << "B0_T            " << format_g9(d.B0) << '\n'
     << "omega_m_rad_s   " << format_g9(omega_m) << '\n'
     << "omega_1_rad_s   " << format_g9(modes.omega_1) << '\n'
     << "omega_2_rad_s   " << format_g9(modes.omega_2) << '\n'
     << "omega_d_rad_s   " << format_g9(d.omega_d) << '\n';
  return os.str();
}

std::string cmd_modes(const json& config, const std::string& out_path) {
  const int n_max = config["modes"]["n_max"].get<int>();
  const double radius = num(config, "magnet.radius_m");
  const auto modes = lamb::find_modes(material_from(config), radius, n_max);
  std::ostringstream csv;
  lamb::write_mode_table(csv, modes);
  if (out_path.empty()) return csv.str();
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << csv.str();
  return "wrote " + std::to_string(modes.size()) + " modes to " + out_path + "\n";
}

std::string cmd_report(const json& config) {
  const Resolved r = resolve_config(config);
  std::ostringstream os;
  for (const auto& line : header_comments(config, r)) os << line << '\n';
  os << (validate_regime(r.magnet, r.drive, r.baths).all_pass() ? "regime: all conditions pass\n"
                                                                : "regime: some conditions FAIL\n");
  return os.str();
}

void write_plot_script(const std::string& csv_path, const Table& table, bool psd_style) {
  std::ofstream out(csv_path + ".gnuplot");
  if (!out) throw std::runtime_error("cannot write " + csv_path + ".gnuplot");
  out << "set datafile separator ','\n"
      << "set datafile commentschars '#'\n"
      << "set key autotitle columnhead\n";
  if (psd_style)
    out << "set logscale y\n";
  else
    out << "set logscale xy\n";
  out << "plot";
  for (size_t i = 1; i < table.columns.size(); ++i) {
    if (table.columns[i] == "status") continue;
    out << (i > 1 ? ", \\\n     " : " ") << "'" << csv_path << "' using 1:" << i + 1
        << " with lines";
  }
  out << '\n';
}

int worker_count_from_env() {
  if (const char* env = std::getenv("ACOUSTOMECH_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return std::min(n, 64);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(std::min(hw, 8u)) : 1;
}

}  // namespace acmech::sweep
