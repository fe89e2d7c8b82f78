#include "planchette/energy.hpp"

#include "support.hpp"

#include "doctest.h"

#include <cmath>
#include <functional>

using namespace planchette;
using namespace planchette::testing;

namespace {

const PotentialParams kParams{};

Eigen::Vector2d fd_gradient(const std::function<double(const Position&)>& f, const Position& p, double h = 1e-5)
{
    const Eigen::Vector2d ex(h, 0), ey(0, h);
    return {(f(p + ex) - f(p - ex)) / (2 * h), (f(p + ey) - f(p - ey)) / (2 * h)};
}

}  // namespace

TEST_SUITE("energy") {

TEST_CASE("cauchy potential values")
{
    CHECK(phi_cauchy(0.0, 0.3) == 0.0);
    CHECK(phi_cauchy(0.3, 0.3) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-14));
    CHECK(phi_cauchy(3.0, 0.3) == doctest::Approx(0.5 * std::log(101.0)).epsilon(1e-14));
    CHECK(phi_cauchy(3.0, 0.3) == doctest::Approx(2.30756).epsilon(1e-5));
    double prev = 0.0;
    for (double r = 0.01; r < 10.0; r += 0.01) {
        CHECK(phi_cauchy(r, 0.3) > prev);
        prev = phi_cauchy(r, 0.3);
    }
}

TEST_CASE("elemental energy and gradient")
{
    const Position goal(0, 0);
    CHECK(elemental_energy<double>(goal, goal, kParams) == 0.0);
    CHECK(elemental_gradient<double>(goal, goal, kParams) == Eigen::Vector2d::Zero());

    const Eigen::Vector2d g = elemental_gradient<double>(Position(0.3, 0), goal, kParams);
    CHECK(g.x() == doctest::Approx(0.3 / 0.18).epsilon(1e-14));
    CHECK(g.x() == doctest::Approx(1.6667).epsilon(1e-4));
    CHECK(g.y() == 0.0);

    const PotentialParams shifted{0.3, 5.0};
    const Position p(1.3, -0.4);
    CHECK(elemental_energy<double>(p, goal, shifted) - elemental_energy<double>(p, goal, kParams) == doctest::Approx(5.0));
    CHECK(elemental_gradient<double>(p, goal, shifted) == elemental_gradient<double>(p, goal, kParams));

    const Eigen::Vector2d dir = Eigen::Vector2d(0.6, -0.8);
    double prev = -1.0;
    for (double t = 0.0; t < 5.0; t += 0.05) {
        const double e = elemental_energy<double>(Position(goal + t * dir), goal, kParams);
        CHECK(e > prev);
        prev = e;
    }
}

TEST_CASE("effective energy")
{
    const BoardLayout b = default_board();
    const Alphabet& a = b.alphabet();
    const Position p(2.2, 1.7);
    CHECK(effective_energy(p, point_mass(a, "m"), b, kParams) ==
          doctest::Approx(elemental_energy<double>(p, b.goal(*a.find("m")), kParams)).epsilon(1e-15));

    // a at (0,0), b at (1,0): midpoint is half a unit from each.
    const Eigen::VectorXd half = dist_of(a, {{"a", 0.5}, {"b", 0.5}});
    CHECK(effective_energy({0.5, 0.0}, half, b, kParams) == doctest::Approx(phi_cauchy(0.5, 0.3)).epsilon(1e-14));

    std::mt19937_64 rng(1);
    const Eigen::VectorXd d1 = random_dist(a, rng), d2 = random_dist(a, rng);
    const Eigen::VectorXd mix = 0.5 * d1 + 0.5 * d2;
    CHECK(effective_energy(p, mix, b, kParams) ==
          doctest::Approx(0.5 * effective_energy(p, d1, b, kParams) + 0.5 * effective_energy(p, d2, b, kParams))
              .epsilon(1e-13));
}

TEST_CASE("fused energy is the sum of effective energies")
{
    const BoardLayout b = default_board();
    std::mt19937_64 rng(2);
    const Eigen::VectorXd d1 = random_dist(b.alphabet(), rng), d2 = random_dist(b.alphabet(), rng);
    const EnergyContext one(b, {d1}, kParams);
    const EnergyContext same(b, {d1, d1}, kParams);
    const EnergyContext two(b, {d1, d2}, kParams);
    for (int k = 0; k < 100; ++k) {
        const Position p = random_position(b.bounds(), rng);
        const double e1 = effective_energy(p, d1, b, kParams);
        CHECK(fused_energy(p, one) == e1);
        CHECK(fused_energy(p, same) == 2.0 * e1);
        CHECK(fused_energy(p, two) == e1 + effective_energy(p, d2, b, kParams));
        const Eigen::Vector2d sum = gradient(p, d1, b, kParams) + gradient(p, d2, b, kParams);
        CHECK((fused_gradient(p, two) - sum).norm() < 1e-12);
    }
}

TEST_CASE("analytic gradients match central differences")
{
    const BoardLayout b = default_board();
    std::mt19937_64 rng(3);
    const Eigen::VectorXd d1 = random_dist(b.alphabet(), rng), d2 = random_dist(b.alphabet(), rng);
    const EnergyContext ctx(b, {d1, d2}, kParams);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Position p = random_position(b.bounds(), rng);
        const Eigen::Vector2d fd = fd_gradient([&](const Position& q) { return fused_energy(q, ctx); }, p);
        worst = std::max(worst, (fused_gradient(p, ctx) - fd).norm() / (1.0 + fd.norm()));
        const Eigen::Vector2d fd1 = fd_gradient([&](const Position& q) { return effective_energy(q, d1, b, kParams); }, p);
        worst = std::max(worst, (gradient(p, d1, b, kParams) - fd1).norm() / (1.0 + fd1.norm()));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("translation invariance")
{
    const BoardLayout b = default_board();
    const Eigen::RowVector2d shift(-4.75, 8.5);
    const BoardLayout t(b.alphabet(), b.goals().rowwise() + shift,
                        Bounds{b.bounds().x_min + shift.x(), b.bounds().x_max + shift.x(),
                               b.bounds().y_min + shift.y(), b.bounds().y_max + shift.y()});
    std::mt19937_64 rng(4);
    const Eigen::VectorXd d = random_dist(b.alphabet(), rng);
    for (int k = 0; k < 100; ++k) {
        const Position p = random_position(b.bounds(), rng);
        const Position q = p + shift.transpose();
        CHECK(std::abs(effective_energy(p, d, b, kParams) - effective_energy(q, d, t, kParams)) < 1e-12);
        CHECK((gradient(p, d, b, kParams) - gradient(q, d, t, kParams)).norm() < 1e-12);
    }
}

TEST_CASE("gradient norm bound")
{
    const BoardLayout b = default_board();
    const double per_goal = 1.0 / (2.0 * kParams.r0);
    std::mt19937_64 rng(6);
    const Eigen::VectorXd d1 = random_dist(b.alphabet(), rng), d2 = random_dist(b.alphabet(), rng);
    const EnergyContext ctx(b, {d1, d2}, kParams);
    CHECK(gradient_norm_bound(2, kParams) == doctest::Approx(2.0 * per_goal));
    for (int k = 0; k < 1000; ++k) {
        const Position p = random_position(b.bounds(), rng);
        const auto terms = goal_gradients<double>(p, b.goals(), kParams);
        CHECK(terms.rowwise().norm().maxCoeff() <= per_goal * (1 + 1e-12));
        CHECK(fused_gradient(p, ctx).norm() <= gradient_norm_bound(2, kParams));
    }
    // The per-goal maximum is attained at r = r0.
    const Eigen::Vector2d at_r0 = elemental_gradient<double>(Position(0, 0.3), Position(0, 0), kParams);
    CHECK(at_r0.norm() == doctest::Approx(per_goal).epsilon(1e-14));
}

TEST_CASE("energy context validation")
{
    const BoardLayout b = default_board();
    const Eigen::VectorXd bad = Eigen::VectorXd::Constant(28, 0.5);
    CHECK_THROWS_AS(EnergyContext(b, {bad}, kParams), std::invalid_argument);
    CHECK_THROWS_AS(EnergyContext(b, {}, kParams), std::invalid_argument);
    CHECK_THROWS_AS(EnergyContext(b, {Eigen::VectorXd::Ones(3) / 3.0}, kParams), std::invalid_argument);
}

}  // TEST_SUITE
