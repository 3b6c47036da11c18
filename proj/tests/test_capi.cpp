#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "brakelab.h"

namespace {

struct Masses {
    brk_masses* p = nullptr;
    Masses(double a, double b, double c) { REQUIRE(brk_masses_create(a, b, c, &p) == BRK_OK); }
    ~Masses() { brk_masses_free(p); }
};

struct Result {
    brk_result* p = nullptr;
    ~Result() { brk_result_free(p); }
};

size_t table_index(const brk_result* r, const char* name) {
    for (size_t i = 0; i < brk_result_table_count(r); ++i)
        if (std::strcmp(brk_result_table_name(r, i), name) == 0) return i;
    FAIL("missing table " << name);
    return 0;
}

size_t column_index(const brk_result* r, size_t t, const char* name) {
    for (size_t c = 0; c < brk_result_cols(r, t); ++c)
        if (std::strcmp(brk_result_column(r, t, c), name) == 0) return c;
    FAIL("missing column " << name);
    return 0;
}

} // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(brk_version()).size() > 0);
    CHECK(std::string(brk_status_name(BRK_E_NO_SYZYGY)).size() > 0);
}

TEST_CASE("invalid masses are rejected with a message") {
    brk_masses* m = nullptr;
    CHECK(brk_masses_create(1, -1, 1, &m) == BRK_E_INVALID_ARGUMENT);
    CHECK(m == nullptr);
    CHECK(std::string(brk_last_error()).size() > 0);
    CHECK(brk_masses_create(1, 1, 1, nullptr) == BRK_E_NULL_POINTER);
}

TEST_CASE("mass parameters and the potential") {
    Masses m(1, 1, 1);
    brk_mass_params mp;
    REQUIRE(brk_masses_get(m.p, &mp) == BRK_OK);
    CHECK(mp.m == doctest::Approx(3));
    brk_potential pot;
    REQUIRE(brk_potential_eval(m.p, 0, 0, &pot) == BRK_OK);
    CHECK(pot.V == doctest::Approx(3).epsilon(1e-14));
    CHECK(pot.kappa == doctest::Approx(1).epsilon(1e-14));
    CHECK(pot.at_collision == 0);
    CHECK(brk_potential_eval(m.p, 1, 0, &pot) == BRK_OK);
    CHECK(pot.at_collision == 1);
}

TEST_CASE("grid table") {
    Masses m(1, 2, 10);
    Result r;
    REQUIRE(brk_potential_grid(m.p, 11, &r.p) == BRK_OK);
    size_t t = table_index(r.p, "grid");
    CHECK(brk_result_rows(r.p, t) == 121);
    CHECK(brk_result_cols(r.p, t) == 8);
    CHECK(brk_result_row(r.p, t, 121) == nullptr);
    CHECK(brk_result_row(r.p, 99, 0) == nullptr);
}

TEST_CASE("isosceles admissibility summary at m3 = 1") {
    Result r;
    double m3 = 1.0;
    REQUIRE(brk_iso_admissible(&m3, 1, 1e-10, 1, &r.p) == BRK_OK);
    auto j = nlohmann::json::parse(brk_result_summary(r.p));
    CHECK(j.at("admissible").get<bool>());
    CHECK(j.at("v1").get<double>() < 0);
    CHECK(j.at("v2").get<double>() > 0);
    CHECK(j.at("v3").get<double>() <= -1.3);
}

TEST_CASE("image scan rows") {
    Masses m(1, 1, 1);
    Result r;
    REQUIRE(brk_image_scan(m.p, 1.0, 2, 3, 1e-10, 1, &r.p) == BRK_OK);
    CHECK(brk_result_rows(r.p, table_index(r.p, "image")) == 6);
}

TEST_CASE("restpoint table contains the Lagrange speeds") {
    Masses m(1, 1, 1);
    Result r;
    REQUIRE(brk_restpoints(m.p, 1.0, &r.p) == BRK_OK);
    size_t t = table_index(r.p, "restpoints");
    size_t cv = column_index(r.p, t, "v");
    bool plus = false, minus = false;
    for (size_t i = 0; i < brk_result_rows(r.p, t); ++i) {
        double v = brk_result_row(r.p, t, i)[cv];
        plus = plus || std::abs(v - std::sqrt(6.0)) < 1e-10;
        minus = minus || std::abs(v + std::sqrt(6.0)) < 1e-10;
    }
    CHECK(plus);
    CHECK(minus);
}

TEST_CASE("syzygy map is deterministic in the seed") {
    Masses m(1, 1, 1);
    Result a, b, c;
    REQUIRE(brk_syzygy_map(m.p, 1.0, 20, 5, 0.02, 1e-10, 1, &a.p) == BRK_OK);
    REQUIRE(brk_syzygy_map(m.p, 1.0, 20, 5, 0.02, 1e-10, 2, &b.p) == BRK_OK);
    REQUIRE(brk_syzygy_map(m.p, 1.0, 20, 6, 0.02, 1e-10, 1, &c.p) == BRK_OK);
    size_t t = table_index(a.p, "syzygy");
    size_t cols = brk_result_cols(a.p, t);
    REQUIRE(brk_result_rows(a.p, t) == 20);
    bool same = true, differ = false;
    for (size_t i = 0; i < 20; ++i) {
        same = same && std::memcmp(brk_result_row(a.p, t, i), brk_result_row(b.p, t, i), cols * sizeof(double)) == 0;
        differ = differ || std::memcmp(brk_result_row(a.p, t, i), brk_result_row(c.p, t, i), cols * sizeof(double)) != 0;
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("single syzygy and the triple-collision start") {
    Masses m(1, 1, 1);
    brk_syzygy s;
    REQUIRE(brk_first_syzygy(m.p, 1.0, 0.3, 0.2, 1e-10, &s) == BRK_OK);
    CHECK(s.z_monotone == 1);
    CHECK(s.r > 0);
    CHECK(brk_first_syzygy(m.p, 1.0, 0, 0, 1e-10, &s) == BRK_E_NO_SYZYGY);
    CHECK(brk_first_syzygy(m.p, 1.0, 0.3, 0.2, 1e-3, &s) == BRK_E_INVALID_ARGUMENT);
}

TEST_CASE("homothetic action through the C interface") {
    Masses m(1, 1, 1);
    const int N = 64;
    std::vector<double> nodes;
    for (int i = 0; i <= N; ++i) nodes.insert(nodes.end(), {3.0 * i / N, 0.0, 0.0});
    double a = 0;
    REQUIRE(brk_jm_action(m.p, 1.0, nodes.data(), N + 1, &a) == BRK_OK);
    CHECK(a == doctest::Approx(1.5 * std::numbers::pi).epsilon(1e-6));
}

TEST_CASE("null pointers") {
    CHECK(brk_potential_grid(nullptr, 5, nullptr) == BRK_E_NULL_POINTER);
    CHECK(brk_result_table_count(nullptr) == 0);
    CHECK(brk_result_summary(nullptr) == nullptr);
    brk_result_free(nullptr);
    brk_masses_free(nullptr);
}

TEST_CASE("criterion registry") {
    CHECK(brk_criterion_count() == 11);
    CHECK(brk_criterion_id(0) == 1);
}
