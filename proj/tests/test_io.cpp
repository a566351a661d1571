#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <string>

#include "circlefit/error.hpp"
#include "circlefit/io.hpp"
#include "circlefit/rng.hpp"
#include "doctest.h"

using namespace circlefit;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("parse accepts pairs, comments, and blank lines") {
    DataSet d = parse_dataset("# header\n 1 2 \n\n3.5 -4e2\n# trailing\n");
    REQUIRE(d.size() == 2);
    CHECK(d.points()[0].x == 1.0);
    CHECK(d.points()[0].y == 2.0);
    CHECK(d.points()[1].x == 3.5);
    CHECK(d.points()[1].y == -400.0);
}

TEST_CASE("parse rejects malformed rows") {
    CHECK_THROWS_AS(parse_dataset(""), Error);
    CHECK_THROWS_AS(parse_dataset("# only comments\n"), Error);
    CHECK_THROWS_AS(parse_dataset("1\n"), Error);
    CHECK_THROWS_AS(parse_dataset("1 2 3\n"), Error);
    CHECK_THROWS_AS(parse_dataset("a b\n"), Error);
    CHECK_THROWS_AS(parse_dataset("1 nan\n"), Error);
    CHECK_THROWS_AS(parse_dataset("1 inf\n"), Error);

    try {
        parse_dataset("1 2\nbroken\n");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Io);
    }
}

TEST_CASE("seventeen digit formatting round-trips doubles exactly") {
    Rng rng(13);
    for (int i = 0; i < 2000; ++i) {
        double v = (rng.next_unit() - 0.5) * std::pow(10.0, 30.0 * (rng.next_unit() - 0.5));
        double back = std::stod(fmt_g17(v));
        CHECK(back == v);
    }
    CHECK(std::stod(fmt_g17(0.1)) == 0.1);
    CHECK(fmt_g17(1.0) == "1");
}

TEST_CASE("dataset format round trip is bit exact") {
    Rng rng(19);
    std::vector<Point> pts;
    for (int i = 0; i < 50; ++i)
        pts.push_back({(rng.next_unit() - 0.5) * 1e3, rng.next_gaussian() * 1e-3});
    DataSet d(std::move(pts));
    DataSet back = parse_dataset(format_dataset(d));
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(back.points()[i].x == d.points()[i].x);
        CHECK(back.points()[i].y == d.points()[i].y);
    }
}

TEST_CASE("atomic write leaves the final file and no temporary") {
    std::string path = temp_path("circlefit_io_test.txt");
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".tmp");

    write_file_atomic(path, "hello\n");
    CHECK(read_file(path) == "hello\n");
    CHECK_FALSE(std::filesystem::exists(path + ".tmp"));

    write_file_atomic(path, "replaced\n");
    CHECK(read_file(path) == "replaced\n");
    std::filesystem::remove(path);
}

TEST_CASE("atomic write into a missing directory reports an io error") {
    try {
        write_file_atomic("/nonexistent_dir_42/x.txt", "x");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Io);
    }
}

TEST_CASE("save and load a dataset") {
    std::string path = temp_path("circlefit_io_data.txt");
    DataSet d({{0.25, -1.5}, {3.75, 2.0}, {1e-17, 9.0}});
    save_dataset(d, path);
    DataSet back = load_dataset(path);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.points()[i].x == d.points()[i].x);
        CHECK(back.points()[i].y == d.points()[i].y);
    }
    std::filesystem::remove(path);

    CHECK_THROWS_AS(load_dataset("/no/such/file.txt"), Error);
}

TEST_CASE("config parsing") {
    auto kv = parse_config("# comment\nalpha = 1.5\n beta=x y \nalpha = 2\n");
    CHECK(kv.size() == 2);
    CHECK(kv["alpha"] == "2");  // later assignment wins
    CHECK(kv["beta"] == "x y");

    CHECK_THROWS_AS(parse_config("novalue\n"), Error);
    CHECK_THROWS_AS(parse_config("=5\n"), Error);
    CHECK_THROWS_AS(parse_config("key=\n"), Error);
    CHECK(parse_config("").empty());
}
