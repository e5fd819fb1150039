#include <doctest.h>

#include <limits>
#include <sstream>

#include "mpdae/csv.hpp"
#include "mpdae/error.hpp"
#include "support.hpp"

using namespace mpdae;
using namespace testing;

TEST_CASE("doubles round trip exactly")
{
    const double values[] = {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 6.02214076e23, -1.5e-300,
                             std::numeric_limits<double>::min(), std::numeric_limits<double>::max(),
                             std::numeric_limits<double>::denorm_min()};
    for (double v : values) {
        const std::string s = format_double(v);
        CHECK(parse_double(s, 1) == v);
        CHECK(std::signbit(parse_double(s, 1)) == std::signbit(v));
    }
    for (int k = 0; k < 1000; ++k) {
        const double v = uniform(-1.0, 1.0) * std::pow(10.0, uniform(-30.0, 30.0));
        CHECK(parse_double(format_double(v), 1) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK_THROWS_AS(parse_double("1.5x", 3), ParseError);
    CHECK_THROWS_AS(parse_double("", 3), ParseError);
    try {
        parse_double("abc", 17);
    } catch (const ParseError& e) {
        CHECK(e.line() == 17);
    }
}

TEST_CASE("field splitting")
{
    CHECK(split_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_csv_line("\"x,y\",2") == std::vector<std::string>{"x,y", "2"});
    CHECK(split_csv_line("1,,3") == std::vector<std::string>{"1", "", "3"});
}

TEST_CASE("tables")
{
    CsvTable t;
    t.header = {"t", "value"};
    t.rows = {{0.0, 1.0 / 7.0}, {0.5, -2.25e-17}};
    std::ostringstream os;
    write_csv(os, t);
    CHECK(os.str().find("t,value\r\n") == 0);
    std::istringstream is(os.str());
    const auto back = read_csv(is);
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);

    std::istringstream lf("a,b\n1,2\n3,4\n");
    const auto plain = read_csv(lf);
    CHECK(plain.rows.size() == 2);
    CHECK(plain.rows[1][1] == 4.0);

    std::istringstream bad("a,b\n1,2\n3,zz\n");
    try {
        read_csv(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream ragged("a,b\n1,2,3\n");
    CHECK_THROWS_AS(read_csv(ragged), ParseError);
}

TEST_CASE("trajectories round trip")
{
    Trajectory tr;
    for (int n = 0; n < 4; ++n) {
        GridState s = GridState::zeros(5, 2, 3);
        s.x1 = random_vector(10);
        s.x2 = random_vector(15);
        s.nu = uniform(1.0, 2.0) * 1e7;
        tr.times.push_back(n * 1e-5 / 3.0);
        tr.nu.push_back(s.nu);
        tr.states.push_back(s);
    }
    const auto header = trajectory_header(5, 2, 3);
    REQUIRE(header.size() == 2 + 10 + 15);
    CHECK(header[0] == "t");
    CHECK(header[1] == "nu");
    CHECK(header[2] == "y_1_1");
    CHECK(header[3] == "y_1_2");
    CHECK(header[4] == "y_2_1");
    CHECK(header[12] == "z_1_1");
    CHECK(header.back() == "z_5_3");

    std::stringstream ss;
    write_trajectory(ss, tr);
    const auto back = read_trajectory(ss);
    REQUIRE(back.size() == tr.size());
    for (std::size_t n = 0; n < tr.size(); ++n) {
        CHECK(back.times[n] == tr.times[n]);
        CHECK(back.nu[n] == tr.nu[n]);
        CHECK(back.states[n].m == 5);
        CHECK(back.states[n].n_y == 2);
        CHECK(back.states[n].n_z == 3);
        CHECK((back.states[n].x1.array() == tr.states[n].x1.array()).all());
        CHECK((back.states[n].x2.array() == tr.states[n].x2.array()).all());
        CHECK(back.states[n].nu == tr.nu[n]);
    }
}

TEST_CASE("malformed trajectory files")
{
    auto expect_line = [](const std::string& text, int line) {
        std::istringstream is(text);
        try {
            read_trajectory(is);
            FAIL_CHECK("expected a parse error for: " << text);
        } catch (const ParseError& e) {
            CHECK(e.line() == line);
        }
    };
    expect_line("t,y_1_1,z_1_1\r\n0,1,2\r\n", 1);
    expect_line("t,nu,y_1_1,z_1_1\r\n0,1,1,2\r\n0.5,1,bad,2\r\n", 3);
    expect_line("t,nu,y_1_1,z_1_1\r\n0,1,1,2\r\n0,1,1,2\r\n", 3);
    expect_line("t,nu,y_1_1,q_1_1\r\n0,1,1,2\r\n", 1);
    expect_line("t,nu,y_1_1,z_1_1\r\n", 2);

    // columns are matched by name
    std::istringstream swapped("nu,t,z_1_1,y_1_1\r\n7,0,2,1\r\n");
    const auto tr = read_trajectory(swapped);
    CHECK(tr.nu[0] == 7.0);
    CHECK(tr.times[0] == 0.0);
    CHECK(tr.states[0].x1(0) == 1.0);
    CHECK(tr.states[0].x2(0) == 2.0);
}
