#include "khm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "khm/format.hpp"

namespace khm {

SolverModel solver_model_from_string(const std::string& name) {
    if (name == "emhd") return SolverModel::emhd;
    if (name == "hallmhd") return SolverModel::hallmhd;
    throw ConfigError("unknown solver.model '" + name + "' (expected emhd or hallmhd)");
}

std::string to_string(SolverModel m) { return m == SolverModel::emhd ? "emhd" : "hallmhd"; }

namespace {

void spectral_axpy(SpectralVector& y, real a, const SpectralVector& x) {
    for (int c = 0; c < 3; ++c) {
        const std::size_t m = y.c[c].size();
        for (std::size_t i = 0; i < m; ++i) y.c[c][i] += a * x.c[c][i];
    }
}

/// y += a * lap(x): multiply each mode of x by -|k|^2.
void add_scaled_laplacian(SpectralVector& y, real a, const SpectralVector& x) {
    if (a == 0) return;
    const Grid& g = *x.grid;
    const int n = g.n(), nh = g.n_half();
    for (int iz = 0; iz < n; ++iz) {
        const real kz = g.freq(iz);
        for (int iy = 0; iy < n; ++iy) {
            const real ky = g.freq(iy);
            for (int ikx = 0; ikx < nh; ++ikx) {
                const real k2 = static_cast<real>(ikx) * ikx + ky * ky + kz * kz;
                const std::size_t idx = g.spectral_index(ikx, iy, iz);
                const real f = -a * k2;
                for (int c = 0; c < 3; ++c) y.c[c][idx] += f * x.c[c][idx];
            }
        }
    }
}

VectorField pointwise_cross(const VectorField& a, const VectorField& b) {
    VectorField out(*a.grid);
    const std::size_t total = a.grid->size();
    for (std::size_t i = 0; i < total; ++i) out.set(i, cross(a.at(i), b.at(i)));
    return out;
}

real max_pointwise(const VectorField& f) {
    real m = 0;
    const std::size_t total = f.grid->size();
    for (std::size_t i = 0; i < total; ++i) m = std::max(m, norm(f.at(i)));
    return m;
}

bool spectra_finite(const SpectralVector& f) {
    for (int c = 0; c < 3; ++c)
        for (const auto& z : f.c[c])
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

}  // namespace

SpectralVector rhs_emhd(Transformer& t, const SpectralVector& b, real d_i, real eta) {
    const VectorField J = t.inverse(curl(b));
    const VectorField bf = t.inverse(b);
    SpectralVector w = t.forward(pointwise_cross(J, bf));
    dealias(w);
    SpectralVector out = curl(w);
    for (int c = 0; c < 3; ++c)
        for (auto& z : out.c[c]) z *= -d_i;
    add_scaled_laplacian(out, eta, b);
    return out;
}

std::pair<SpectralVector, SpectralVector> rhs_hallmhd(Transformer& t, const SpectralVector& u,
                                                      const SpectralVector& b, real d_i, real nu,
                                                      real eta) {
    const Grid& g = *b.grid;
    const VectorField uf = t.inverse(u);
    const VectorField bf = t.inverse(b);
    const VectorField omega = t.inverse(curl(u));
    const VectorField J = t.inverse(curl(b));

    const std::size_t total = g.size();
    VectorField momentum(g);   // u x omega + J x b
    VectorField induction(g);  // u x b - d_i J x b
    for (std::size_t i = 0; i < total; ++i) {
        const Vec3 jxb = cross(J.at(i), bf.at(i));
        momentum.set(i, cross(uf.at(i), omega.at(i)) + jxb);
        induction.set(i, cross(uf.at(i), bf.at(i)) - d_i * jxb);
    }

    SpectralVector du = t.forward(momentum);
    dealias(du);
    leray_project(du);
    add_scaled_laplacian(du, nu, u);

    SpectralVector e = t.forward(induction);
    dealias(e);
    SpectralVector db = curl(e);
    add_scaled_laplacian(db, eta, b);
    return {std::move(du), std::move(db)};
}

VectorField rhs_emhd(const VectorField& b, real d_i, real eta) {
    Transformer t(*b.grid);
    SpectralVector bs = t.forward(b);
    dealias(bs);
    return t.inverse(rhs_emhd(t, bs, d_i, eta));
}

std::pair<VectorField, VectorField> rhs_hallmhd(const VectorField& u, const VectorField& b,
                                                real d_i, real nu, real eta) {
    Transformer t(*b.grid);
    SpectralVector us = t.forward(u);
    SpectralVector bs = t.forward(b);
    dealias(us);
    dealias(bs);
    auto [du, db] = rhs_hallmhd(t, us, bs, d_i, nu, eta);
    return {t.inverse(du), t.inverse(db)};
}

real cfl_dt_limit(Transformer& t, const SolverState& s, real safety) {
    const Grid& g = *s.b.grid;
    const real kmax = g.dealias_kmax() * std::sqrt(3.0);
    const real k2max = kmax * kmax;
    const real bmax = max_pointwise(t.inverse(s.b));
    real rate = s.d_i * k2max * bmax + std::max(s.nu, s.eta) * k2max;
    if (s.model == SolverModel::hallmhd) {
        const real umax = max_pointwise(t.inverse(s.u));
        rate += kmax * (umax + bmax);
    }
    if (rate <= 0) return std::numeric_limits<real>::infinity();
    return safety * 2.8 / rate;
}

namespace {

struct Pack {
    SpectralVector u, b;
};

Pack eval_rhs(Transformer& t, const SolverState& s, const Pack& y) {
    Pack k;
    if (s.model == SolverModel::emhd) {
        k.b = rhs_emhd(t, y.b, s.d_i, s.eta);
        k.u = SpectralVector(*y.b.grid);
    } else {
        auto [du, db] = rhs_hallmhd(t, y.u, y.b, s.d_i, s.nu, s.eta);
        k.u = std::move(du);
        k.b = std::move(db);
    }
    return k;
}

Pack advanced(const Pack& y, real a, const Pack& k) {
    Pack out = y;
    spectral_axpy(out.u, a, k.u);
    spectral_axpy(out.b, a, k.b);
    return out;
}

}  // namespace

SolverState step_rk4(Transformer& t, const SolverState& s, real dt,
                     const StepControls& controls) {
    if (!(dt > 0)) throw ConfigError("time step must be positive");
    if (controls.check_cfl) {
        const real limit = cfl_dt_limit(t, s, controls.cfl_safety);
        if (dt > limit)
            throw PreconditionError("time step " + format_real(dt) +
                                    " exceeds the stability bound " + format_real(limit) +
                                    " at t = " + format_real(s.t));
    }

    const Pack y0{s.u, s.b};
    const Pack k1 = eval_rhs(t, s, y0);
    const Pack k2 = eval_rhs(t, s, advanced(y0, dt / 2, k1));
    const Pack k3 = eval_rhs(t, s, advanced(y0, dt / 2, k2));
    const Pack k4 = eval_rhs(t, s, advanced(y0, dt, k3));

    SolverState next = s;
    next.t = s.t + dt;
    const real w = dt / 6.0;
    spectral_axpy(next.u, w, k1.u);
    spectral_axpy(next.u, 2 * w, k2.u);
    spectral_axpy(next.u, 2 * w, k3.u);
    spectral_axpy(next.u, w, k4.u);
    spectral_axpy(next.b, w, k1.b);
    spectral_axpy(next.b, 2 * w, k2.b);
    spectral_axpy(next.b, 2 * w, k3.b);
    spectral_axpy(next.b, w, k4.b);

    if (!spectra_finite(next.b) || !spectra_finite(next.u))
        throw PreconditionError("solution lost finiteness at t = " + format_real(next.t));
    return next;
}

LedgerRow measure_invariants(Transformer& t, const SolverState& s) {
    const Grid& g = *s.b.grid;
    const real V = g.volume();
    LedgerRow row;
    row.t = s.t;

    const SpectralVector J = curl(s.b);
    const SpectralVector A = inverse_curl(s.b);
    const real ms_b = spectral_mean_square(s.b);
    row.H_M = V * spectral_mean_dot(A, s.b);
    row.eps_M = 2 * s.eta * spectral_mean_dot(J, s.b);
    row.div_defect_b = divergence_defect(s.b);
    row.max_b = max_pointwise(t.inverse(s.b));

    if (s.model == SolverModel::hallmhd) {
        const SpectralVector omega = curl(s.u);
        const real ms_u = spectral_mean_square(s.u);
        row.E = V * 0.5 * (ms_u + ms_b);
        row.H_C = V * spectral_mean_dot(s.u, s.b);
        // (A+u).(b+omega) = A.b + 2 u.b + u.omega since <A.omega> = <b.u>
        row.H_G = row.H_M + 2 * row.H_C + V * spectral_mean_dot(s.u, omega);
        row.eps_E = s.eta * spectral_mean_square(J) + s.nu * spectral_mean_grad_square(s.u);
        row.eps_C = (s.nu + s.eta) * spectral_mean_dot(J, omega);
        row.eps_H = row.eps_M + 2 * (s.nu + s.eta) * spectral_mean_dot(J, omega) +
                    2 * s.nu * spectral_mean_dot(omega, curl(omega));
        row.div_defect_u = divergence_defect(s.u);
        row.max_u = max_pointwise(t.inverse(s.u));
    } else {
        row.E = V * 0.5 * ms_b;
        row.H_G = row.H_M;
        row.eps_E = s.eta * spectral_mean_square(J);
        row.eps_H = row.eps_M;
    }
    return row;
}

void write_ledger_csv(std::ostream& out, const InvariantLedger& ledger) {
    out << "t,E,H_M,H_G,H_C,eps_E\n";
    for (const auto& r : ledger.rows)
        out << format_real(r.t) << ',' << format_real(r.E) << ',' << format_real(r.H_M) << ','
            << format_real(r.H_G) << ',' << format_real(r.H_C) << ',' << format_real(r.eps_E)
            << '\n';
}

void write_ledger_diagnostics_csv(std::ostream& out, const InvariantLedger& ledger) {
    out << "t,eps_M,eps_C,eps_H,div_defect_b,div_defect_u,max_b,max_u\n";
    for (const auto& r : ledger.rows)
        out << format_real(r.t) << ',' << format_real(r.eps_M) << ',' << format_real(r.eps_C)
            << ',' << format_real(r.eps_H) << ',' << format_real(r.div_defect_b) << ','
            << format_real(r.div_defect_u) << ',' << format_real(r.max_b) << ','
            << format_real(r.max_u) << '\n';
}

namespace {

std::vector<real> parse_csv_row(const std::string& line, std::size_t expected) {
    std::vector<real> values;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
        try {
            values.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ConfigError("ledger CSV: malformed value '" + cell + "'");
        }
    }
    if (values.size() != expected)
        throw ConfigError("ledger CSV: expected " + std::to_string(expected) +
                          " columns, found " + std::to_string(values.size()));
    return values;
}

}  // namespace

InvariantLedger read_ledger_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "t,E,H_M,H_G,H_C,eps_E")
        throw ConfigError("ledger CSV: unexpected header '" + line + "'");
    InvariantLedger ledger;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<real> v = parse_csv_row(line, 6);
        LedgerRow row;
        row.t = v[0];
        row.E = v[1];
        row.H_M = v[2];
        row.H_G = v[3];
        row.H_C = v[4];
        row.eps_E = v[5];
        ledger.rows.push_back(row);
    }
    return ledger;
}

void merge_ledger_diagnostics_csv(std::istream& in, InvariantLedger& ledger) {
    std::string line;
    if (!std::getline(in, line) || line != "t,eps_M,eps_C,eps_H,div_defect_b,div_defect_u,max_b,max_u")
        throw ConfigError("ledger diagnostics CSV: unexpected header '" + line + "'");
    std::size_t i = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (i >= ledger.rows.size())
            throw ConfigError("ledger diagnostics CSV: more rows than the main ledger");
        const std::vector<real> v = parse_csv_row(line, 8);
        LedgerRow& row = ledger.rows[i];
        if (std::abs(v[0] - row.t) > 1e-12 * std::max(std::abs(row.t), 1.0))
            throw ConfigError("ledger diagnostics CSV: time column does not match the main ledger");
        row.eps_M = v[1];
        row.eps_C = v[2];
        row.eps_H = v[3];
        row.div_defect_b = v[4];
        row.div_defect_u = v[5];
        row.max_b = v[6];
        row.max_u = v[7];
        ++i;
    }
    if (i != ledger.rows.size())
        throw ConfigError("ledger diagnostics CSV: fewer rows than the main ledger");
}

RunResult run(Transformer& t, SolverState state, const RunOptions& opt) {
    if (!(opt.t_end >= state.t)) throw ConfigError("t_end must be >= the initial time");

    RunResult result;
    result.ledger.rows.push_back(measure_invariants(t, state));
    if (opt.on_snapshot && opt.snapshot_interval > 0) opt.on_snapshot(state);

    real next_snapshot = state.t + opt.snapshot_interval;
    int step_count = 0;
    const real tiny = 1e-12 * std::max(opt.dt, real(1));
    while (state.t + tiny < opt.t_end) {
        const real dt = std::min(opt.dt, opt.t_end - state.t);
        state = step_rk4(t, state, dt, opt.controls);
        ++step_count;
        if (opt.ledger_stride > 0 && step_count % opt.ledger_stride == 0)
            result.ledger.rows.push_back(measure_invariants(t, state));
        if (opt.on_snapshot && opt.snapshot_interval > 0 && state.t + tiny >= next_snapshot &&
            state.t + opt.dt + tiny < opt.t_end) {
            opt.on_snapshot(state);
            next_snapshot += opt.snapshot_interval;
        }
    }

    if (opt.ledger_stride <= 0 || step_count % opt.ledger_stride != 0)
        result.ledger.rows.push_back(measure_invariants(t, state));
    if (opt.on_snapshot) opt.on_snapshot(state);
    result.final_state = std::move(state);
    result.steps = step_count;
    return result;
}

namespace {

/// Portable uniform double in [0,1) from the top 53 bits.
real uniform01(std::mt19937_64& rng) {
    return static_cast<real>(rng() >> 11) * 0x1.0p-53;
}

/// Box-Muller; std::normal_distribution is not bit-stable across library
/// implementations, this is.
real gaussian(std::mt19937_64& rng) {
    real u1 = uniform01(rng);
    while (u1 <= 0) u1 = uniform01(rng);
    const real u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
}

void scale_spectrum(SpectralVector& f, real s) {
    for (int c = 0; c < 3; ++c)
        for (auto& z : f.c[c]) z *= s;
}

/// Fill solenoidal Gaussian modes on 0 < |k| <= kmax, Hermitian by
/// construction, then normalize the rms to `amplitude`.
SpectralVector random_solenoidal(const Grid& g, std::mt19937_64& rng, int kmax, real amplitude) {
    SpectralVector f(g);
    for (int kz = -kmax; kz <= kmax; ++kz)
        for (int ky = -kmax; ky <= kmax; ++ky)
            for (int kx = -kmax; kx <= kmax; ++kx) {
                const real k2 = static_cast<real>(kx) * kx + static_cast<real>(ky) * ky +
                                static_cast<real>(kz) * kz;
                if (k2 == 0 || k2 > static_cast<real>(kmax) * kmax) continue;
                // store only the representative whose stored index has kx >= 0;
                // on the kx = 0 plane keep the lexicographically positive half
                if (kx < 0) continue;
                if (kx == 0 && (ky < 0 || (ky == 0 && kz < 0))) continue;

                Vec3 re{gaussian(rng), gaussian(rng), gaussian(rng)};
                Vec3 im{gaussian(rng), gaussian(rng), gaussian(rng)};
                const Vec3 kv{static_cast<real>(kx), static_cast<real>(ky),
                              static_cast<real>(kz)};
                re = re - (dot(re, kv) / k2) * kv;
                im = im - (dot(im, kv) / k2) * kv;

                const int iy = ky >= 0 ? ky : ky + g.n();
                const int iz = kz >= 0 ? kz : kz + g.n();
                const std::size_t idx = g.spectral_index(kx, iy, iz);
                for (int c = 0; c < 3; ++c) f.c[c][idx] = complexr{re[c], im[c]};
                if (kx == 0 && !(ky == 0 && kz == 0)) {
                    const int jy = (-ky) >= 0 ? -ky : -ky + g.n();
                    const int jz = (-kz) >= 0 ? -kz : -kz + g.n();
                    const std::size_t jdx = g.spectral_index(0, jy, jz);
                    for (int c = 0; c < 3; ++c) f.c[c][jdx] = complexr{re[c], -im[c]};
                }
            }
    const real rms = std::sqrt(spectral_mean_square(f));
    if (rms > 0 && amplitude != 0)
        scale_spectrum(f, amplitude / rms);
    else
        f = SpectralVector(g);
    return f;
}

}  // namespace

InitialCondition make_initial_condition(const Grid& g, const std::string& kind,
                                        std::uint64_t seed, int kmax, real amplitude,
                                        SolverModel model) {
    InitialCondition ic{SpectralVector(g), SpectralVector(g)};
    Transformer t(g);

    if (kind == "abc") {
        VectorField b(g);
        for (int iz = 0; iz < g.n(); ++iz)
            for (int iy = 0; iy < g.n(); ++iy)
                for (int ix = 0; ix < g.n(); ++ix) {
                    const Vec3 p = g.point(ix, iy, iz);
                    b.set(g.index(ix, iy, iz),
                          amplitude * Vec3{std::sin(p.z) + std::cos(p.y),
                                           std::sin(p.x) + std::cos(p.z),
                                           std::sin(p.y) + std::cos(p.x)});
                }
        ic.b = t.forward(b);
    } else if (kind == "random_lowk") {
        if (kmax < 1) throw ConfigError("ic.kmax must be >= 1 for random_lowk");
        if (kmax > g.dealias_kmax())
            throw ConfigError("ic.kmax exceeds the dealiased shell of the grid");
        std::mt19937_64 rng(seed);
        ic.b = random_solenoidal(g, rng, kmax, amplitude);
        if (model == SolverModel::hallmhd) ic.u = random_solenoidal(g, rng, kmax, amplitude);
    } else if (kind == "orszag_tang_3d") {
        VectorField u(g), b(g);
        for (int iz = 0; iz < g.n(); ++iz)
            for (int iy = 0; iy < g.n(); ++iy)
                for (int ix = 0; ix < g.n(); ++ix) {
                    const Vec3 p = g.point(ix, iy, iz);
                    const std::size_t i = g.index(ix, iy, iz);
                    u.set(i, amplitude * Vec3{-std::sin(p.y), std::sin(p.x), 0.0});
                    b.set(i, amplitude * Vec3{-2.0 * std::sin(2.0 * p.y) + std::sin(p.z),
                                              2.0 * std::sin(p.x) + std::sin(p.z),
                                              std::sin(p.x) + std::sin(p.y)});
                }
        ic.b = t.forward(b);
        if (model == SolverModel::hallmhd) ic.u = t.forward(u);
    } else {
        throw ConfigError("unknown ic.kind '" + kind + "'");
    }

    dealias(ic.b);
    dealias(ic.u);
    return ic;
}

Snapshot make_snapshot(Transformer& t, const SolverState& s) {
    Snapshot snap(s.b.grid->n(), s.t);
    snap.set_param("hallmhd", s.model == SolverModel::hallmhd ? 1.0 : 0.0);
    snap.set_param("d_i", s.d_i);
    snap.set_param("nu", s.nu);
    snap.set_param("eta", s.eta);
    t.inverse_into(s.b, snap.add_field("b"));
    if (s.model == SolverModel::hallmhd) t.inverse_into(s.u, snap.add_field("u"));
    return snap;
}

SolverState state_from_snapshot(const Snapshot& snap) {
    SolverState s;
    s.model = snap.param_or("hallmhd", 0.0) != 0.0 ? SolverModel::hallmhd : SolverModel::emhd;
    s.t = snap.time;
    s.d_i = snap.param_or("d_i", 1.0);
    s.nu = snap.param_or("nu", 0.0);
    s.eta = snap.param_or("eta", 0.0);
    Transformer t(*snap.grid);
    s.b = t.forward(snap.require_field("b"));
    if (s.model == SolverModel::hallmhd)
        s.u = t.forward(snap.require_field("u"));
    else
        s.u = SpectralVector(*snap.grid);
    return s;
}

}  // namespace khm
