#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spraylab/errors.hpp"
#include "spraylab/report.hpp"

using namespace spraylab;

namespace {

RunConfig config(const std::string& spec) {
    RunConfig c;
    parse_spray_spec(spec, c);
    return c;
}

const nlohmann::json* find_row(const nlohmann::json& doc, const std::string& id) {
    for (const auto& r : doc["rows"])
        if (r["id"] == id) return &r;
    return nullptr;
}

}  // namespace

TEST(Report, SpraySpecParsing) {
    const auto c = config("sphere:n=4,kappa=2");
    EXPECT_EQ(c.family, "sphere");
    EXPECT_EQ(c.params.at("n"), "4");
    EXPECT_EQ(c.params.at("kappa"), "2");
    EXPECT_EQ(config("flat").params.size(), 0u);
    RunConfig bad;
    EXPECT_THROW(parse_spray_spec("sphere:n=3,n=4", bad), InputError);
    EXPECT_THROW(parse_spray_spec("sphere:n", bad), InputError);
    EXPECT_THROW(parse_spray_spec("", bad), InputError);
}

TEST(Report, ToleranceParsing) {
    RunConfig c;
    parse_tolerance("1e-6", c);
    parse_tolerance("bianchi.first=1e-3", c);
    EXPECT_EQ(*c.tol_global, 1e-6);
    EXPECT_EQ(c.tol_overrides.at("bianchi.first"), 1e-3);
    EXPECT_THROW(parse_tolerance("-1", c), InputError);
    EXPECT_THROW(parse_tolerance("x=abc", c), InputError);
    EXPECT_THROW(parse_tolerance("=1e-3", c), InputError);
}

TEST(Report, VerifyFlatPasses) {
    auto c = config("flat");
    c.points = 5;
    const auto r = cmd_verify(c);
    EXPECT_EQ(r.exit_code(), 0);
    EXPECT_EQ(r.failed(), 0);
    const auto doc = to_json(r);
    EXPECT_EQ(doc["summary"]["fail"], 0);
    EXPECT_EQ(doc["summary"]["total"], static_cast<int>(r.rows.size()));
}

TEST(Report, TinyToleranceFails) {
    auto c = config("randers");
    c.points = 3;
    parse_tolerance("1e-30", c);
    const auto r = cmd_verify(c);
    EXPECT_EQ(r.exit_code(), 1);
}

TEST(Report, OverrideAppliesToOneRow) {
    auto c = config("randers");
    c.points = 3;
    parse_tolerance("chi.cartan=1e-30", c);
    const auto doc = to_json(cmd_verify(c));
    const auto* row = find_row(doc, "chi.cartan");
    ASSERT_NE(row, nullptr);
    EXPECT_EQ((*row)["status"], "fail");
    EXPECT_EQ((*row)["tolerance"], 1e-30);
    EXPECT_EQ(doc["summary"]["fail"], 1);
}

TEST(Report, LowOrderMarksRowsNotApplicable) {
    auto c = config("sphere");
    c.points = 2;
    c.order = 2;
    const auto doc = to_json(cmd_verify(c));
    const auto* row = find_row(doc, "bianchi.second");
    ASSERT_NE(row, nullptr);
    EXPECT_EQ((*row)["status"], "n/a");
    EXPECT_NE((*row)["note"].get<std::string>().find("needs jet order"), std::string::npos);
    EXPECT_TRUE((*row)["max_residual"].is_null());
    EXPECT_EQ(doc["summary"]["fail"], 0);
}

TEST(Report, JsonIsDeterministic) {
    auto c = config("affine_shift:A=x1,D=1+x2");
    c.points = 4;
    c.seed = 7;
    const auto a = canonical_dump(to_json(cmd_verify(c)));
    const auto b = canonical_dump(to_json(cmd_verify(c)));
    EXPECT_EQ(a, b);
    c.seed = 8;
    EXPECT_NE(a, canonical_dump(to_json(cmd_verify(c))));
}

TEST(Report, CanonicalDumpFormat) {
    nlohmann::json j = {{"b", 0.1}, {"a", {1, 2}}};
    EXPECT_EQ(canonical_dump(j), "{\n  \"a\": [1, 2],\n  \"b\": 0.10000000000000001\n}\n");
}

TEST(Report, EvaluateFlatIsZero) {
    auto c = config("flat:n=3");
    const auto doc = to_json(cmd_evaluate(c));
    ASSERT_EQ(doc["points"].size(), 3u);
    for (const auto& p : doc["points"])
        for (const auto& [name, q] : p["quantities"].items())
            if (q.is_object())
                for (const auto& v : q["data"]) EXPECT_EQ(v.get<double>(), 0.0) << name;
}

TEST(Report, EvaluateSColumn) {
    auto c = config("randers");
    c.sigmas = {"exp(x1)"};
    const auto doc = to_json(cmd_evaluate(c));
    for (const auto& p : doc["points"]) {
        const double Pi = p["quantities"]["Pi"]["data"][0];
        const double y1 = p["y"][0];
        const auto& vol = p["quantities"]["volume"][0];
        EXPECT_NEAR(vol["S"].get<double>(), Pi - y1, 1e-13);
    }
}

TEST(Report, EvaluateOrderGates) {
    auto c = config("sphere");
    c.order = 1;
    const auto doc = to_json(cmd_evaluate(c));
    const auto& p = doc["points"][0]["quantities"];
    EXPECT_TRUE(p.contains("N"));
    EXPECT_FALSE(p.contains("Ric"));
    EXPECT_FALSE(p.contains("eta"));
}

TEST(Report, ErrorTypes) {
    EXPECT_THROW(load_spray(config("nosuch")), InputError);
    EXPECT_THROW(load_spray(config("sphere:bogus=1")), InputError);
    EXPECT_THROW(load_spray(config("affine_shift:A=y1")), Error);
    RunConfig c = config("flat");
    c.order = 9;
    EXPECT_THROW(load_spray(c), InputError);
    RunConfig f;
    f.file = "/nonexistent/spray.def";
    EXPECT_THROW(load_spray(f), Error);
}

TEST(Report, CustomFileRows) {
    RunConfig c;
    c.file = std::string(SPRAYLAB_DATA_DIR) + "/non_closed_pi.spray";
    c.family = "custom";
    c.points = 5;
    const auto doc = to_json(cmd_verify(c));
    EXPECT_EQ(doc["summary"]["fail"], 0);
    const auto* row = find_row(doc, "s_closed.chi");
    ASSERT_NE(row, nullptr);
    EXPECT_EQ((*row)["status"], "n/a");
}

TEST(Report, TextRendering) {
    auto c = config("flat");
    c.points = 2;
    const auto text = render_text(cmd_verify(c));
    EXPECT_NE(text.find("bianchi.first"), std::string::npos);
    EXPECT_NE(text.find("pass"), std::string::npos);
}

TEST(Report, WriteAtomic) {
    const auto dir = std::filesystem::temp_directory_path() / "spraylab_test_report";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "out.json").string();
    write_atomic(path, "one\n");
    write_atomic(path, "two\n");
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), "two\n");
    int files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.is_regular_file();
    EXPECT_EQ(files, 1);
    std::filesystem::remove_all(dir);
}

TEST(Report, ListJson) {
    const auto j = list_json();
    ASSERT_TRUE(j.is_array() || j.is_object());
    EXPECT_NE(cmd_list().find("sphere"), std::string::npos);
}
