#include "khm/increments.hpp"

#include <cmath>
#include <ostream>

#include "khm/format.hpp"

namespace khm {

void require_unit_direction(const Vec3& nhat) {
    const real n = norm(nhat);
    if (std::abs(n - 1.0) > 1e-12)
        throw PreconditionError("direction is not a unit vector, |n| = " + format_real(n));
}

VectorField increment(Transformer& t, const SpectralVector& spec, const Vec3& ell) {
    const Grid& g = *spec.grid;
    VectorField shifted(g);
    t.shifted_into(spec, ell, shifted);
    VectorField base(g);
    t.inverse_into(spec, base);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < g.size(); ++i)
            shifted.c[c][i] -= base.c[c][i];
    return shifted;
}

VectorField project_longitudinal(const VectorField& f, const Vec3& nhat) {
    require_unit_direction(nhat);
    VectorField out(*f.grid);
    for (std::size_t i = 0; i < f.grid->size(); ++i)
        out.set(i, longitudinal_part(f.at(i), nhat));
    return out;
}

VectorField project_transverse(const VectorField& f, const Vec3& nhat) {
    require_unit_direction(nhat);
    VectorField out(*f.grid);
    for (std::size_t i = 0; i < f.grid->size(); ++i)
        out.set(i, transverse_part(f.at(i), nhat));
    return out;
}

ShiftedFieldBank::ShiftedFieldBank(const Grid& g) : grid_(&g), transformer_(g) {}

int ShiftedFieldBank::add(const SpectralVector& spec) {
    spectra_.push_back(spec);
    base_.emplace_back(*grid_);
    shifted_.emplace_back(*grid_);
    const int slot = count() - 1;
    transformer_.inverse_into(spectra_[slot], base_[slot]);
    return slot;
}

void ShiftedFieldBank::shift_all(const Vec3& ell) {
    for (int s = 0; s < count(); ++s)
        transformer_.shifted_into(spectra_[s], ell, shifted_[s]);
}

real shell_average(const ShellIntegrand& f, real lambda, const DirectionSet& dirs,
                   const Grid& g, int stride) {
    if (!(lambda >= g.spacing()))
        throw ConfigError("separation " + format_real(lambda) + " is below the grid spacing " +
                          format_real(g.spacing()));
    if (stride < 1) throw ConfigError("stride must be >= 1");

    const std::size_t total = g.size();
    real sum = 0;
    for (int d = 0; d < dirs.count(); ++d) {
        const Vec3 nhat = dirs.n[d];
        f.prepare(nhat, lambda * nhat);
        real acc = 0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < total; i += static_cast<std::size_t>(stride)) {
            acc += f.eval(i, nhat);
            ++used;
        }
        sum += dirs.w[d] * (acc / static_cast<real>(used));
    }
    return sum / lambda;
}

SeparationScan log_spaced_scan(real lambda_min, real lambda_max, int count, const Grid& g) {
    if (count < 1) throw ConfigError("separation scan needs at least one value");
    if (!(lambda_min > 0) || !(lambda_max >= lambda_min))
        throw ConfigError("separation scan bounds must satisfy 0 < min <= max");
    if (lambda_min < g.spacing())
        throw ConfigError("smallest separation " + format_real(lambda_min) +
                          " is below the grid spacing " + format_real(g.spacing()));
    if (lambda_max > box_length / 4)
        throw ConfigError("largest separation " + format_real(lambda_max) +
                          " exceeds a quarter box length");

    SeparationScan scan;
    scan.lambdas.reserve(count);
    if (count == 1) {
        scan.lambdas.push_back(lambda_min);
        return scan;
    }
    const real ratio = std::log(lambda_max / lambda_min) / (count - 1);
    for (int i = 0; i < count; ++i)
        scan.lambdas.push_back(lambda_min * std::exp(ratio * i));
    scan.lambdas.back() = lambda_max;
    return scan;
}

void write_shell_csv(std::ostream& out, const std::vector<ShellSample>& samples) {
    out << "lambda,direction_count,value,estimator_name\n";
    for (const auto& s : samples)
        out << format_real(s.lambda) << ',' << s.direction_count << ',' << format_real(s.value)
            << ',' << s.estimator_name << '\n';
}

}  // namespace khm
