#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "aoismpc/chi2.hpp"
#include "aoismpc/errors.hpp"

using namespace aoismpc;

TEST_CASE("regularized gamma against Boost") {
    for (double a : {0.5, 1.0, 1.5, 2.0, 3.5, 5.0, 10.0, 25.0}) {
        for (double x : {1e-6, 0.01, 0.3, 1.0, 2.5, a, a + 1.0, 7.0, 20.0, 60.0}) {
            CHECK(std::abs(regularized_gamma_p(a, x) - boost::math::gamma_p(a, x)) < 1e-13);
        }
    }
}

TEST_CASE("two degrees of freedom is exponential") {
    CHECK(chi2_quantile(0.0, 2) == 0.0);
    for (double g : {0.5, 0.9, 0.95, 0.99}) {
        CHECK(std::abs(chi2_quantile(g, 2) + 2.0 * std::log1p(-g)) < 1e-9);
    }
}

TEST_CASE("quantiles against Boost and the forward CDF") {
    CHECK(chi2_quantile(0.95, 1) == doctest::Approx(3.8415).epsilon(1e-4));
    for (int dof = 1; dof <= 10; ++dof) {
        const boost::math::chi_squared dist(dof);
        for (double g : {1e-6, 0.01, 0.3, 0.5, 0.8, 0.9, 0.95, 0.99, 0.999999}) {
            const double c = chi2_quantile(g, dof);
            CHECK(std::abs(chi2_cdf(c, dof) - g) <= 1e-10);
            CHECK(c == doctest::Approx(boost::math::quantile(dist, g)).epsilon(1e-9));
        }
    }
}

TEST_CASE("quantile domain") {
    CHECK_THROWS_AS(chi2_quantile(1.0, 2), InvalidProbability);
    CHECK_THROWS_AS(chi2_quantile(-0.1, 2), InvalidProbability);
    CHECK_THROWS_AS(chi2_quantile(0.5, 0), InvalidProbability);
}
