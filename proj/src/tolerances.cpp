#include "smoothlab/tolerances.hpp"

#include "smoothlab/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace smoothlab {

Tolerances Tolerances::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor))
        raise(ErrorKind::InvalidConfig, "tolerance scale must be positive and finite");
    Tolerances t = *this;
    for (double* f : {&t.eig_residual, &t.svd_residual, &t.solve_pivot, &t.solve_residual,
                      &t.realness, &t.row_sum, &t.perron_value, &t.perron_vector, &t.tie,
                      &t.oscillation, &t.phase, &t.imag_residue, &t.zero_coefficient,
                      &t.rank_cutoff, &t.multiplicity})
        *f *= factor;
    return t;
}

Tolerances tolerances_from_environment() {
    const char* raw = std::getenv("SMOOTHLAB_TOL_SCALE");
    if (raw == nullptr || *raw == '\0')
        return Tolerances{};
    char* end = nullptr;
    const double factor = std::strtod(raw, &end);
    if (end == raw || *end != '\0')
        raise(ErrorKind::InvalidConfig, std::string("SMOOTHLAB_TOL_SCALE is not a number: ") + raw);
    return Tolerances{}.scaled(factor);
}

} // namespace smoothlab
