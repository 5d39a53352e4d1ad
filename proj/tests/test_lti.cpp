#include <catch2/catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include "sls/errors.hpp"
#include "sls/lti.hpp"

using Catch::Matchers::WithinAbs;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("system construction rejects malformed shapes") {
    CHECK_THROWS_AS(sls::LtiSystem(MatrixXd::Zero(2, 3), MatrixXd::Zero(2, 1)),
                    sls::DimensionError);
    CHECK_THROWS_AS(sls::LtiSystem(MatrixXd(), MatrixXd()), sls::DimensionError);
    CHECK_THROWS_AS(sls::LtiSystem(MatrixXd::Zero(2, 2), MatrixXd::Zero(3, 1)),
                    sls::DimensionError);
    CHECK_THROWS_AS(sls::LtiSystem(MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 0)),
                    sls::DimensionError);

    const sls::LtiSystem sys(MatrixXd::Identity(3, 3) * 0.5, MatrixXd::Ones(3, 2));
    CHECK(sys.nx() == 3);
    CHECK(sys.nu() == 2);
}

TEST_CASE("spectral radius on hand-checkable matrices") {
    MatrixXd d = MatrixXd::Zero(2, 2);
    d(0, 0) = 0.5;
    d(1, 1) = -0.3;
    CHECK_THAT(sls::spectral_radius(d), WithinAbs(0.5, 1e-12));

    MatrixXd rot(2, 2);  // eigenvalues +-0.5i
    rot << 0.0, 1.0, -0.25, 0.0;
    CHECK_THAT(sls::spectral_radius(rot), WithinAbs(0.5, 1e-12));

    MatrixXd nil(2, 2);  // nilpotent
    nil << 0.0, 1.0, 0.0, 0.0;
    CHECK_THAT(sls::spectral_radius(nil), WithinAbs(0.0, 1e-12));
}

TEST_CASE("stability test uses a strict margin below one") {
    CHECK(sls::is_schur_stable(MatrixXd::Identity(2, 2) * 0.9));
    CHECK(sls::is_schur_stable(MatrixXd::Identity(2, 2) * 0.999));
    CHECK_FALSE(sls::is_schur_stable(MatrixXd::Identity(2, 2)));
    // Within the numerical guard band: treated as not reliably stable.
    CHECK_FALSE(sls::is_schur_stable(MatrixXd::Identity(2, 2) * (1.0 - 1e-12)));
    CHECK_FALSE(sls::is_schur_stable(MatrixXd::Identity(2, 2) * 1.5));
}

TEST_CASE("plant step arithmetic and dimension checks") {
    MatrixXd a(2, 2);
    a << 0.5, 0.1, 0.0, 0.4;
    MatrixXd b(2, 1);
    b << 1.0, 2.0;
    const sls::LtiSystem sys(a, b);

    VectorXd x(2), u(1), d(2);
    x << 1.0, -1.0;
    u << 0.5;
    d << 0.25, 0.0;
    const VectorXd next = sls::step_plant(sys, x, u, d);
    CHECK_THAT(next(0), WithinAbs(0.5 - 0.1 + 0.5 + 0.25, 1e-15));
    CHECK_THAT(next(1), WithinAbs(-0.4 + 1.0, 1e-15));

    CHECK_THROWS_AS(sls::step_plant(sys, VectorXd::Zero(3), u, d), sls::DimensionError);
    CHECK_THROWS_AS(sls::step_plant(sys, x, VectorXd::Zero(2), d), sls::DimensionError);
    CHECK_THROWS_AS(sls::step_plant(sys, x, u, VectorXd::Zero(1)), sls::DimensionError);
}

TEST_CASE("system json round trip and rejection of malformed input") {
    MatrixXd a(2, 2);
    a << 0.5, 0.125, -0.25, 0.0625;
    MatrixXd b(2, 1);
    b << 1.0, -2.0;
    const sls::LtiSystem sys(a, b);

    nlohmann::json j;
    sls::to_json(j, sys);
    const sls::LtiSystem back = sls::lti_from_json(j);
    CHECK(back.A == sys.A);  // values are dyadic rationals, so exact round trip
    CHECK(back.B == sys.B);

    nlohmann::json ragged = j;
    ragged["A"] = nlohmann::json::array({{1.0, 2.0}, {3.0}});
    CHECK_THROWS_AS(sls::lti_from_json(ragged), sls::SpecError);

    nlohmann::json text = j;
    text["B"] = nlohmann::json::array({{"x"}, {"y"}});
    CHECK_THROWS_AS(sls::lti_from_json(text), sls::SpecError);

    CHECK_THROWS_AS(sls::lti_from_json(nlohmann::json{{"A", j["A"]}}), sls::SpecError);
}
