#pragma once

#include <cmath>
#include <string>

#include "vfl/error.hpp"

namespace vfl {

/// Viscosities and the barotropic pressure law P(rho) = a rho^gamma.
struct MaterialParams {
    double mu = 1.0;
    double lambda = 0.5;
    double pressure_a = 1.0;
    double pressure_gamma = 1.4;

    double pressure(double rho) const { return pressure_a * std::pow(rho, pressure_gamma); }
    double pressure_slope(double rho) const {
        return pressure_a * pressure_gamma * std::pow(rho, pressure_gamma - 1.0);
    }
    double sound_speed(double rho) const { return std::sqrt(pressure_slope(rho)); }

    /// mu > 0 and 2 mu + d lambda > 0 make the viscous operator strongly
    /// elliptic; the pressure law must be increasing with P(1) = a > 0.
    void validate(int dim) const {
        if (!(mu > 0.0)) throw InvalidArgument("material: mu must be positive");
        if (!(2.0 * mu + dim * lambda > 0.0))
            throw InvalidArgument("material: ellipticity violated: 2mu+" +
                                  std::to_string(dim) + "lambda <= 0");
        if (!(pressure_a > 0.0)) throw InvalidArgument("material: pressure_a must be positive");
        if (!(pressure_gamma >= 1.0))
            throw InvalidArgument("material: pressure_gamma must be >= 1");
    }
};

}  // namespace vfl
