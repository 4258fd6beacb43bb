#include "decaylab/wave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "decaylab/errors.hpp"
#include "decaylab/roots.hpp"

namespace decaylab::wave {

using feedback::g_hat;
using feedback::g_hat_prime;

namespace {

constexpr double kNewtonTol = 1e-13;
constexpr int kNewtonMaxIter = 200;

// Second difference with homogeneous Dirichlet ends.
double laplacian(const std::vector<double>& u, int j, double inv_dx2) {
  const int n = static_cast<int>(u.size());
  const double left = j > 0 ? u[j - 1] : 0.0;
  const double right = j + 1 < n ? u[j + 1] : 0.0;
  return (left - 2.0 * u[j] + right) * inv_dx2;
}

// sum over the n + 1 cells of D+f * D+g, with zero boundary values.
double gradient_product(const std::vector<double>& f, const std::vector<double>& g, double dx) {
  const int n = static_cast<int>(f.size());
  double sum = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double df = (j < n ? f[j] : 0.0) - (j > 0 ? f[j - 1] : 0.0);
    const double dg = (j < n ? g[j] : 0.0) - (j > 0 ? g[j - 1] : 0.0);
    sum += df * dg;
  }
  return sum / dx;
}

std::vector<double> sample_profile(const InitialProfile& profile, int n, double dx) {
  std::vector<double> values(n);
  for (int j = 0; j < n; ++j) values[j] = profile.value((j + 1) * dx);
  return values;
}

}  // namespace

double InitialProfile::value(double x) const {
  switch (shape) {
    case InitialShape::zero:
      return 0.0;
    case InitialShape::sine:
      return amplitude * std::sin(mode * std::numbers::pi * x);
    case InitialShape::bump: {
      const double r = (x - center) / width;
      if (std::abs(r) >= 0.5) return 0.0;
      const double c = std::cos(std::numbers::pi * r);
      return amplitude * c * c;
    }
  }
  return 0.0;
}

void InitialProfile::validate() const {
  if (shape == InitialShape::sine && mode < 1) {
    throw DomainError("sine initial profile needs mode >= 1");
  }
  if (shape == InitialShape::bump) {
    if (!(width > 0.0)) throw DomainError("bump initial profile needs width > 0");
    if (center - 0.5 * width < 0.0 || center + 0.5 * width > 1.0) {
      throw DomainError("initial profile must vanish at the boundary (bump leaves (0,1))");
    }
  }
}

std::vector<double> build_coefficients(const CoefficientField& field, int n,
                                       std::optional<double> max_cap) {
  if (n < 1) throw DomainError("build_coefficients: need at least one node");
  feedback::validate(field, max_cap);
  const double dx = 1.0 / (n + 1);
  std::vector<double> values(n);
  for (int j = 0; j < n; ++j) values[j] = feedback::field_value(field, (j + 1) * dx);
  return values;
}

double time_step(const SimulationConfig& config) {
  if (config.n < 2) throw DomainError("grid needs at least 2 interior nodes");
  const double dx = 1.0 / (config.n + 1);
  const double dt = config.dt.value_or(config.cfl * dx);
  if (!(dt > 0.0) || !(dt < dx)) {
    std::ostringstream msg;
    msg << "CFL violation: dt = " << dt << " must satisfy 0 < dt < dx = " << dx;
    throw DomainError(msg.str());
  }
  if (!config.dt && !(config.cfl > 0.0 && config.cfl < 1.0)) {
    throw DomainError("cfl must lie in (0, 1)");
  }
  return dt;
}

WaveState init_state(const SimulationConfig& config) {
  for (const auto* p : {&config.u0, &config.u1, &config.v0, &config.v1}) p->validate();
  WaveState s;
  s.n = config.n;
  s.dt = time_step(config);
  s.dx = 1.0 / (config.n + 1);
  s.law = config.law;
  s.alpha = build_coefficients(config.alpha, config.n, config.alpha_max);
  s.a = build_coefficients(config.damping, config.n);

  const auto u0 = sample_profile(config.u0, s.n, s.dx);
  const auto u1 = sample_profile(config.u1, s.n, s.dx);
  const auto v0 = sample_profile(config.v0, s.n, s.dx);
  const auto v1 = sample_profile(config.v1, s.n, s.dx);
  const double inv_dx2 = 1.0 / (s.dx * s.dx);

  // Taylor start at t = -dt/2 and t = +dt/2 with accelerations from the
  // semi-discrete equations.
  const double h = 0.5 * s.dt;
  s.u_prev.resize(s.n);
  s.u_curr.resize(s.n);
  s.v_prev.resize(s.n);
  s.v_curr.resize(s.n);
  std::vector<double> utt(s.n), vtt(s.n);
  for (int j = 0; j < s.n; ++j) {
    utt[j] = laplacian(u0, j, inv_dx2) - s.alpha[j] * v1[j] -
             feedback::rho_eval(s.law, s.a[j], u1[j]);
    vtt[j] = laplacian(v0, j, inv_dx2) + s.alpha[j] * u1[j];
    s.u_prev[j] = u0[j] - h * u1[j] + 0.5 * h * h * utt[j];
    s.u_curr[j] = u0[j] + h * u1[j] + 0.5 * h * h * utt[j];
    s.v_prev[j] = v0[j] - h * v1[j] + 0.5 * h * h * vtt[j];
    s.v_curr[j] = v0[j] + h * v1[j] + 0.5 * h * h * vtt[j];
  }
  s.s_last = u1;
  s.t = h;

  double e1 = 0.0;
  for (int j = 0; j < s.n; ++j) e1 += utt[j] * utt[j] + vtt[j] * vtt[j];
  e1 *= s.dx;
  e1 += gradient_product(u1, u1, s.dx) + gradient_product(v1, v1, s.dx);
  s.e1_start = 0.5 * e1;
  return s;
}

void step(WaveState& s) {
  const int n = s.n;
  const double dt = s.dt;
  const double h = 0.5 * dt;
  const double inv_dx2 = 1.0 / (s.dx * s.dx);
  // Recycle the oldest level as the output buffer.
  std::vector<double> u_next = std::move(s.u_prev2);
  std::vector<double> v_next = std::move(s.v_prev2);
  u_next.resize(n);
  v_next.resize(n);

  for (int j = 0; j < n; ++j) {
    const double al = s.alpha[j];
    const double damp = s.a[j];
    // Undamped, uncoupled midpoint velocities implied by the explicit part.
    const double ru = (s.u_curr[j] - s.u_prev[j]) / dt + h * laplacian(s.u_curr, j, inv_dx2);
    const double rv = (s.v_curr[j] - s.v_prev[j]) / dt + h * laplacian(s.v_curr, j, inv_dx2);
    // Eliminating the v-midpoint velocity w = rv + h al s leaves
    //   c s + h a ghat(s) = ru - h al rv,   c = 1 + (h al)^2.
    const double c = 1.0 + (h * al) * (h * al);
    const double rhs = ru - h * al * rv;
    double vel = rhs / c;
    if (damp > 0.0 && rhs != 0.0) {
      const double k = h * damp;
      const double lo = std::min(0.0, rhs / c);
      const double hi = std::max(0.0, rhs / c);
      const double tol = kNewtonTol * std::min(1.0, std::abs(rhs / c));
      auto f = [&](double x) { return c * x + k * g_hat(s.law, x) - rhs; };
      auto df = [&](double x) { return c + k * g_hat_prime(s.law, x); };
      const auto root = numeric::safeguarded_newton(f, df, lo, hi, s.s_last[j], tol,
                                                    kNewtonMaxIter);
      if (!root.converged) {
        std::ostringstream msg;
        msg << "nodal solve failed at node " << (j + 1) << " (x = " << (j + 1) * s.dx
            << ", t = " << s.t << "): residual " << root.residual << " after "
            << root.iterations << " iterations";
        throw ConvergenceError(msg.str());
      }
      vel = root.x;
    }
    const double w = rv + h * al * vel;
    s.s_last[j] = vel;
    u_next[j] = s.u_prev[j] + 2.0 * dt * vel;
    v_next[j] = s.v_prev[j] + 2.0 * dt * w;
  }

  s.u_prev2 = std::move(s.u_prev);
  s.v_prev2 = std::move(s.v_prev);
  s.u_prev = std::move(s.u_curr);
  s.v_prev = std::move(s.v_curr);
  s.u_curr = std::move(u_next);
  s.v_curr = std::move(v_next);
  s.t += dt;
  ++s.steps;
}

namespace {

double first_order_energy(const WaveState& s) {
  double kinetic = 0.0;
  for (int j = 0; j < s.n; ++j) {
    const double du = s.u_curr[j] - s.u_prev[j];
    const double dv = s.v_curr[j] - s.v_prev[j];
    kinetic += du * du + dv * dv;
  }
  kinetic *= s.dx / (s.dt * s.dt);
  const double potential =
      gradient_product(s.u_curr, s.u_prev, s.dx) + gradient_product(s.v_curr, s.v_prev, s.dx);
  return 0.5 * (kinetic + potential);
}

}  // namespace

Energies energy(const WaveState& s) {
  Energies e;
  e.E = first_order_energy(s);

  if (s.steps == 0) {
    e.E1 = s.e1_start;
  } else if (s.u_prev2.size() == s.u_curr.size()) {
    std::vector<double> ut(s.n), vt(s.n);
    double acc = 0.0;
    const double inv_dt2 = 1.0 / (s.dt * s.dt);
    for (int j = 0; j < s.n; ++j) {
      const double utt = (s.u_curr[j] - 2.0 * s.u_prev[j] + s.u_prev2[j]) * inv_dt2;
      const double vtt = (s.v_curr[j] - 2.0 * s.v_prev[j] + s.v_prev2[j]) * inv_dt2;
      acc += utt * utt + vtt * vtt;
      ut[j] = (s.u_curr[j] - s.u_prev[j]) / s.dt;
      vt[j] = (s.v_curr[j] - s.v_prev[j]) / s.dt;
    }
    e.E1 = 0.5 * (acc * s.dx + gradient_product(ut, ut, s.dx) + gradient_product(vt, vt, s.dx));
  } else {
    e.E1 = std::numeric_limits<double>::quiet_NaN();
  }
  return e;
}

double energy_time(const WaveState& s) { return s.t - 0.5 * s.dt; }

double dissipation_rate(const WaveState& s) {
  double sum = 0.0;
  for (int j = 0; j < s.n; ++j) {
    if (s.a[j] == 0.0) continue;
    const double vel = (s.u_curr[j] - s.u_prev[j]) / s.dt;
    sum += vel * feedback::rho_eval(s.law, s.a[j], vel);
  }
  return -sum * s.dx;
}

WaveState reversed(const WaveState& state) {
  WaveState r = state;
  std::swap(r.u_prev, r.u_curr);
  std::swap(r.v_prev, r.v_curr);
  r.u_prev2.clear();
  r.v_prev2.clear();
  for (auto& v : r.s_last) v = -v;
  return r;
}

EnergyTrace run(const SimulationConfig& config) {
  WaveState state = init_state(config);
  EnergyTrace trace;
  trace.meta.config_digest = config.digest;
  trace.meta.n = state.n;
  trace.meta.dx = state.dx;
  trace.meta.dt = state.dt;

  const auto stride = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::llround(config.sample_dt / state.dt)));
  const auto total_steps =
      static_cast<std::int64_t>(std::ceil(config.t_final / state.dt - 1e-9));

  auto record = [&](const Energies& e) {
    trace.samples.push_back({energy_time(state), e.E,
                             config.smooth_data ? e.E1 : std::numeric_limits<double>::quiet_NaN(),
                             dissipation_rate(state)});
  };

  const double e0 = first_order_energy(state);
  record(energy(state));
  double previous = e0;
  while (state.steps < total_steps) {
    step(state);
    const double E = first_order_energy(state);
    if (e0 > 0.0) {
      trace.meta.max_step_increase = std::max(trace.meta.max_step_increase, (E - previous) / e0);
      trace.meta.max_drift = std::max(trace.meta.max_drift, std::abs(E - e0) / e0);
    }
    previous = E;
    const bool floor_hit = e0 > 0.0 && E < 1e-14 * e0;
    if (state.steps % stride == 0 || state.steps == total_steps || floor_hit) record(energy(state));
    if (floor_hit) {
      trace.meta.stopped_early = true;
      break;
    }
  }
  trace.meta.steps = state.steps;
  return trace;
}

std::string digest(const std::string& text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << hash;
  return out.str();
}

}  // namespace decaylab::wave
