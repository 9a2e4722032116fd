#pragma once

#include "berglab/fem.hpp"

#include <iosfwd>
#include <vector>

namespace berglab {

struct DerivativeSample {
    int facet = 1;
    double coord = 0.0;   ///< x on horizontal facets, y on vertical ones
    double value = 0.0;   ///< x u_x or y u_y
    bool excluded = false;
};

struct BergViolation {
    int facet = 1;
    double coord = 0.0;
    double value = 0.0;
};

struct BergReport {
    bool holds = true;
    /// Smallest slack threshold - value over the tested samples.
    double margin = 0.0;
    double threshold = 0.0;
    std::vector<BergViolation> violations;
    double excluded_radius = 0.0;
    bool weak_berg_holds = true;
    std::vector<DerivativeSample> samples;

    bool violated_on(int facet) const;
};

struct BergOptions {
    double tol_sign = 1e-3;
    double r_excl = 0.0; ///< 0 selects 3 * (size of the boundary edge at the corner)
};

/// Signs of x u_x on facet 1 and y u_y on facet 4 from central differences of
/// the nodal trace. A sample is a violation when it exceeds tol_sign * max(a, b).
BergReport check_berg(const FemField& field, const DomainSpec& domain, double a, double b,
                      const BergOptions& options = {});

/// Trace largest at the facet centre and smallest at the outermost
/// non-excluded samples, on both facet 1 and facet 4.
bool check_weak_berg(const FemField& field, const DomainSpec& domain, double r_excl = 0.0);

/// Largest u_x over an n x n sample grid of the right half of the domain.
double max_interior_ux(const FemField& field, int n);

/// Columns facet, coord, value, excluded.
void write_berg_profile_csv(const BergReport& report, std::ostream& os);

} // namespace berglab
