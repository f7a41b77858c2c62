#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "irmlab/spec.hpp"

using namespace irmlab;

TEST_CASE("cmnist_plus lays out the one-parameter family") {
  SUBCASE("rho=0.9 first environment") {
    DatasetSpec spec = cmnist_plus(0.9);
    const EnvironmentSpec& e1 = spec.env_by_id(1);
    CHECK(e1.p_y1 == doctest::Approx(0.9));
    CHECK(e1.p_color(1, Color::G) == doctest::Approx(0.9));
    CHECK(e1.p_color(1, Color::B) == doctest::Approx(0.05));
    CHECK(e1.p_color(1, Color::R) == doctest::Approx(0.05));
  }
  SUBCASE("rho=0.55 second environment, negative row") {
    DatasetSpec spec = cmnist_plus(0.55);
    const EnvironmentSpec& e2 = spec.env_by_id(2);
    CHECK(e2.p_y1 == doctest::Approx(0.1));
    CHECK(e2.p_color(0, Color::G) == doctest::Approx(0.225));
    CHECK(e2.p_color(0, Color::B) == doctest::Approx(0.225));
    CHECK(e2.p_color(0, Color::R) == doctest::Approx(0.55));
  }
  SUBCASE("test environment is fixed") {
    for (double rho : {0.51, 0.75, 0.99}) {
      DatasetSpec spec = cmnist_plus(rho);
      const EnvironmentSpec& e3 = spec.test_env();
      CHECK(e3.env_id == 3);
      CHECK(e3.p_y1 == doctest::Approx(0.5));
      CHECK(e3.p_color(1, Color::G) == doctest::Approx(0.1));
      CHECK(e3.p_color(1, Color::R) == doctest::Approx(0.8));
      CHECK(e3.p_color(0, Color::G) == doctest::Approx(0.4));
      CHECK(e3.p_color(0, Color::R) == doctest::Approx(0.2));
    }
  }
  SUBCASE("uniform prior and flip rate") {
    DatasetSpec spec = cmnist_plus(0.8);
    CHECK(spec.env_prior == std::vector<double>{0.5, 0.5});
    CHECK(spec.flip_rate == doctest::Approx(0.25));
    CHECK(spec.rho == doctest::Approx(0.8));
  }
  SUBCASE("rho outside (0.5,1) is rejected") {
    CHECK_THROWS_AS(cmnist_plus(0.5), std::invalid_argument);
    CHECK_THROWS_AS(cmnist_plus(1.0), std::invalid_argument);
    CHECK_THROWS_AS(cmnist_plus(0.2), std::invalid_argument);
  }
  SUBCASE("rows sum to 1 across the whole range") {
    for (double rho = 0.51; rho < 1.0; rho += 0.01) {
      DatasetSpec spec = cmnist_plus(rho);
      for (const auto& env : spec.environments)
        for (int row = 0; row < 2; ++row) {
          double sum = 0.0;
          for (int col = 0; col < 3; ++col) sum += env.color_table[row][col];
          CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
  }
}

TEST_CASE("cmnist matches its published table") {
  DatasetSpec spec = cmnist();
  CHECK(spec.env_by_id(1).p_color(1, Color::G) == doctest::Approx(0.9));
  CHECK(spec.env_by_id(1).p_color(1, Color::B) == doctest::Approx(0.0));
  CHECK(spec.env_by_id(1).p_color(1, Color::R) == doctest::Approx(0.1));
  CHECK(spec.env_by_id(2).p_color(0, Color::G) == doctest::Approx(0.2));
  CHECK(spec.env_by_id(2).p_color(0, Color::R) == doctest::Approx(0.8));
  for (const auto& env : spec.environments)
    CHECK(env.p_y1 == doctest::Approx(0.5));
  CHECK(validate_spec(spec).ok());
}

TEST_CASE("interpolate endpoints and midpoint") {
  SUBCASE("w_plus=0, p_ye=0.5 equals cmnist on training rows") {
    DatasetSpec mix = interpolate({0.0, 0.5});
    DatasetSpec base = cmnist();
    for (int env_id : {1, 2}) {
      CHECK(mix.env_by_id(env_id).p_y1 == doctest::Approx(0.5));
      for (int row = 0; row < 2; ++row)
        for (int col = 0; col < 3; ++col)
          CHECK(mix.env_by_id(env_id).color_table[row][col] ==
                doctest::Approx(base.env_by_id(env_id).color_table[row][col]));
    }
  }
  SUBCASE("w_plus=1, p_ye=0.9 equals cmnist_plus(0.9)") {
    DatasetSpec mix = interpolate({1.0, 0.9});
    DatasetSpec plus = cmnist_plus(0.9);
    for (int env_id : {1, 2, 3}) {
      CHECK(mix.env_by_id(env_id).p_y1 ==
            doctest::Approx(plus.env_by_id(env_id).p_y1));
      for (int row = 0; row < 2; ++row)
        for (int col = 0; col < 3; ++col)
          CHECK(mix.env_by_id(env_id).color_table[row][col] ==
                doctest::Approx(plus.env_by_id(env_id).color_table[row][col]));
    }
  }
  SUBCASE("w_plus=0.5 cell (Y=1,E=1)") {
    DatasetSpec mix = interpolate({0.5, 0.7});
    CHECK(mix.env_by_id(1).p_color(1, Color::G) == doctest::Approx(0.9));
    CHECK(mix.env_by_id(1).p_color(1, Color::B) == doctest::Approx(0.025));
    CHECK(mix.env_by_id(1).p_color(1, Color::R) == doctest::Approx(0.075));
    CHECK(mix.env_by_id(1).p_y1 == doctest::Approx(0.7));
    CHECK(mix.env_by_id(2).p_y1 == doctest::Approx(0.3));
  }
  SUBCASE("continuity in w_plus") {
    const double w1 = 0.3, w2 = 0.300001;
    DatasetSpec a = interpolate({w1, 0.7});
    DatasetSpec b = interpolate({w2, 0.7});
    for (int env_id : {1, 2})
      for (int row = 0; row < 2; ++row)
        for (int col = 0; col < 3; ++col) {
          double diff = std::abs(a.env_by_id(env_id).color_table[row][col] -
                                 b.env_by_id(env_id).color_table[row][col]);
          CHECK(diff <= 2.0 * std::abs(w1 - w2));
        }
  }
  SUBCASE("bad parameters rejected") {
    CHECK_THROWS_AS(interpolate({-0.1, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(interpolate({0.5, 0.95}), std::invalid_argument);
  }
}

TEST_CASE("validate_spec reports violations") {
  SUBCASE("constructors are fixed points") {
    CHECK(validate_spec(cmnist_plus(0.8)).ok());
    CHECK(validate_spec(cmnist()).ok());
    for (double w : {0.0, 0.25, 0.5, 0.75, 1.0})
      CHECK(validate_spec(interpolate({w, 0.7})).ok());
  }
  SUBCASE("bad color row is named") {
    DatasetSpec spec = cmnist_plus(0.8);
    spec.environments[1].color_table[0][0] = 0.0;  // row now sums to 0.9
    ValidationReport report = validate_spec(spec);
    REQUIRE_FALSE(report.ok());
    bool named = false;
    for (const auto& v : report.violations)
      if (v.find("E=2") != std::string::npos && v.find("Y=1") != std::string::npos)
        named = true;
    CHECK(named);
  }
  SUBCASE("flip rate out of range") {
    DatasetSpec spec = cmnist_plus(0.8);
    spec.flip_rate = 0.6;
    ValidationReport report = validate_spec(spec);
    REQUIRE_FALSE(report.ok());
    bool named = false;
    for (const auto& v : report.violations)
      if (v.find("flip_rate") != std::string::npos) named = true;
    CHECK(named);
  }
  SUBCASE("prior must sum to 1") {
    DatasetSpec spec = cmnist_plus(0.8);
    spec.env_prior = {0.7, 0.7};
    CHECK_FALSE(validate_spec(spec).ok());
  }
  SUBCASE("rho=0.5 passes only via a hand-built spec") {
    DatasetSpec spec = cmnist_plus(0.51);
    spec.rho = 0.5;
    CHECK(validate_spec(spec).ok());
  }
}

TEST_CASE("config round-trip preserves the spec") {
  for (const DatasetSpec& spec :
       {cmnist_plus(0.85), cmnist(), interpolate({0.4, 0.7})}) {
    const std::string text = spec_to_config(spec);
    DatasetSpec back = spec_from_config(text);
    CHECK(back.digest() == spec.digest());
    CHECK(back.flip_rate == doctest::Approx(spec.flip_rate));
    CHECK(back.environments.size() == spec.environments.size());
    CHECK(back.rho.has_value() == spec.rho.has_value());
    for (std::size_t i = 0; i < spec.environments.size(); ++i)
      for (int row = 0; row < 2; ++row)
        for (int col = 0; col < 3; ++col)
          CHECK(back.environments[i].color_table[row][col] ==
                doctest::Approx(spec.environments[i].color_table[row][col]));
  }
}

TEST_CASE("digest distinguishes different specs") {
  CHECK(cmnist_plus(0.8).digest() != cmnist_plus(0.81).digest());
  CHECK(cmnist_plus(0.8).digest() == cmnist_plus(0.8).digest());
  CHECK(cmnist().digest() != cmnist_plus(0.9).digest());
}
