#include <doctest.h>

#include <fstream>

#include "lasim/mcs_table.hpp"

using namespace lasim;

TEST_CASE("bundled table pins the reference rows") {
    const McsTable& t = McsTable::table1();
    REQUIRE(t.size() == 29);

    const McsEntry& low = t.lookup(0);
    CHECK(low.mod_order == 2);
    CHECK(low.code_rate == doctest::Approx(120.0 / 1024).epsilon(1e-12));
    CHECK(low.se_nom == doctest::Approx(0.2344).epsilon(1e-3));

    const McsEntry& mid = t.lookup(10);
    CHECK(mid.mod_order == 4);
    CHECK(mid.code_rate == doctest::Approx(340.0 / 1024).epsilon(1e-12));
    CHECK(mid.se_nom == doctest::Approx(1.3281).epsilon(1e-3));

    const McsEntry& high = t.lookup(28);
    CHECK(high.mod_order == 6);
    CHECK(high.code_rate == doctest::Approx(948.0 / 1024).epsilon(1e-12));
    CHECK(high.se_nom == doctest::Approx(5.5547).epsilon(1e-3));
}

TEST_CASE("se_nom is consistent and strictly increasing") {
    const McsTable& t = McsTable::table1();
    for (int m = 0; m < t.size(); ++m) {
        const McsEntry& e = t.lookup(m);
        CHECK(e.se_nom == doctest::Approx(e.mod_order * e.code_rate).epsilon(1e-15));
        CHECK((e.mod_order == 2 || e.mod_order == 4 || e.mod_order == 6));
        CHECK(e.code_rate > 0.0);
        CHECK(e.code_rate < 1.0);
    }
    for (int m = 0; m + 1 < t.size(); ++m) {
        CHECK(t.se_nom(m) < t.se_nom(m + 1));
    }
}

TEST_CASE("sum of se_nom is the frozen catalog constant") {
    const McsTable& t = McsTable::table1();
    double sum = 0.0;
    for (int m = 0; m < t.size(); ++m) {
        sum += t.se_nom(m);
    }
    CHECK(sum == doctest::Approx(71094.0 / 1024.0).epsilon(1e-12));
}

TEST_CASE("lookup rejects out-of-range indices") {
    const McsTable& t = McsTable::table1();
    CHECK_THROWS_AS(t.lookup(-1), std::out_of_range);
    CHECK_THROWS_AS(t.lookup(29), std::out_of_range);
}

TEST_CASE("loader validates file contents") {
    auto write_and_load = [](const std::string& body) {
        const std::string path = "tmp_mcs_test.csv";
        std::ofstream out(path);
        out << body;
        out.close();
        return McsTable::load(path);
    };

    SUBCASE("non-contiguous indices") {
        CHECK_THROWS_WITH_AS(write_and_load("0,2,120\n2,2,157\n"), doctest::Contains("contiguous"),
                             std::runtime_error);
    }
    SUBCASE("bad modulation order") {
        CHECK_THROWS_WITH_AS(write_and_load("0,3,120\n"), doctest::Contains("mod_order"), std::runtime_error);
    }
    SUBCASE("non-increasing se_nom") {
        CHECK_THROWS_WITH_AS(write_and_load("0,2,500\n1,2,100\n"), doctest::Contains("strictly increase"),
                             std::runtime_error);
    }
    SUBCASE("rate outside (0,1)") {
        CHECK_THROWS_WITH_AS(write_and_load("0,2,1024\n"), doctest::Contains("code_rate"), std::runtime_error);
    }
    SUBCASE("valid two-row table loads") {
        const McsTable t = write_and_load("# comment\n0,2,120\n1,2,157\n");
        CHECK(t.size() == 2);
        CHECK(t.se_nom(1) == doctest::Approx(2 * 157.0 / 1024));
    }
}
