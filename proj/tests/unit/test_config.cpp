#include "apfold/app/config.hpp"
#include "apfold/error.hpp"

#include <gtest/gtest.h>

#include <string>

namespace {

using namespace apfold;
using namespace apfold::app;

const std::string kMinimal = R"([weight]
preset = rational_decay
power = 3

[nonlinearity]
preset = softplus
mu_lower = 0.5 lambda1
mu_upper = 2*lambda1
offset = 1

[forcing]
t = -2

[grid]
radius = 40
nodes = 4000
)";

std::string error_message(const std::string& text) {
    try {
        parse_config(text, "test.ini");
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::config_error);
        return e.what();
    }
    ADD_FAILURE() << "no error for:\n" << text;
    return "";
}

TEST(Config, ParsesMinimalScenario) {
    const ScenarioConfig c = parse_config(kMinimal);
    EXPECT_EQ(c.problem.weight.preset, WeightPreset::rational_decay);
    EXPECT_EQ(c.problem.weight.params.at(0), 3.0);
    EXPECT_TRUE(c.problem.nonlinearity.mu_lower.relative_to_lambda1);
    EXPECT_EQ(c.problem.nonlinearity.mu_lower.value, 0.5);
    EXPECT_EQ(c.problem.nonlinearity.mu_upper.value, 2.0);
    EXPECT_EQ(c.problem.forcing.t, -2.0);
    EXPECT_EQ(c.problem.grid.nodes, 4000u);
    EXPECT_EQ(c.problem.grid.farfield, FarField::robin_decay);
    EXPECT_EQ(c.run.command, "alpha");
    EXPECT_EQ(c.run.seed, 0u);
}

TEST(Config, RoundTrip) {
    ScenarioConfig c = parse_config(kMinimal);
    c.run.t = -7.25;
    c.run.seed = 42;
    c.problem.forcing.profile = ForcingProfile::table;
    c.problem.forcing.radii = {0.0, 1.0, 2.5};
    c.problem.forcing.values = {0.1, -0.2, 1.0 / 3.0};
    const std::string once = serialize_config(c);
    const ScenarioConfig back = parse_config(once);
    EXPECT_EQ(serialize_config(back), once);
    EXPECT_EQ(back.problem.forcing.values[2], 1.0 / 3.0);
    EXPECT_EQ(back.run.t, -7.25);
    EXPECT_EQ(back.run.seed, 42u);
}

TEST(Config, CanonicalScenarioRoundTrips) {
    const std::string text = serialize_config(canonical_scenario());
    EXPECT_EQ(serialize_config(parse_config(text)), text);
}

TEST(Config, ShippedFilesParse) {
    for (const char* name : {"canonical.ini", "sanity_ball.ini", "linear.ini"}) {
        const ScenarioConfig c = load_config(std::string(APFOLD_CONFIG_DIR) + "/" + name);
        EXPECT_EQ(serialize_config(parse_config(serialize_config(c))), serialize_config(c)) << name;
    }
}

TEST(Config, EmptyNamesFirstMissingSection) {
    EXPECT_NE(error_message("").find("missing section [weight]"), std::string::npos);
    EXPECT_NE(error_message("[weight]\npreset = constant\n").find("missing section [nonlinearity]"), std::string::npos);
}

TEST(Config, FieldDiagnosticsCarryLineNumbers) {
    std::string text = kMinimal;
    text.replace(text.find("power = 3"), 9, "power = x");
    const std::string msg = error_message(text);
    EXPECT_NE(msg.find("test.ini:3:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[weight] power"), std::string::npos) << msg;
}

TEST(Config, RejectsUnknownKeysSectionsAndPresets) {
    EXPECT_NE(error_message(kMinimal + "colour = red\n").find("unknown key"), std::string::npos);
    EXPECT_NE(error_message(kMinimal + "[extras]\na = 1\n").find("unknown section [extras]"), std::string::npos);
    std::string text = kMinimal;
    text.replace(text.find("softplus"), 8, "cubic");
    EXPECT_NE(error_message(text).find("unknown nonlinearity preset"), std::string::npos);
    EXPECT_NE(error_message("[weight\n").find("test.ini:1:"), std::string::npos);
}

TEST(Config, RejectsInvalidValues) {
    EXPECT_NE(error_message(kMinimal + "dim = 2\n").find("[grid] dim"), std::string::npos);
    EXPECT_NE(error_message(kMinimal + "farfield = neumann\n").find("farfield"), std::string::npos);
    EXPECT_NE(error_message(kMinimal + "[run]\nnewton_tol = 0\n").find("must be positive"), std::string::npos);
    EXPECT_NE(error_message(kMinimal + "[run]\ncommand = plot\n").find("unknown command"), std::string::npos);
    EXPECT_NE(error_message(kMinimal + "[run]\nseed = -1\n").find("seed"), std::string::npos);
    std::string swapped = kMinimal;
    swapped.replace(swapped.find("2*lambda1"), 9, "0.1 lambda1");
    EXPECT_NE(error_message(swapped).find("must exceed mu_lower"), std::string::npos);
}

TEST(Config, LinearPresetAndAbsoluteSlopes) {
    std::string text = kMinimal;
    text.replace(text.find("preset = softplus"), 17, "preset = linear\nslope = 2.5\nintercept = 1");
    text.replace(text.find("mu_lower = 0.5 lambda1\n"), 23, "");
    text.replace(text.find("mu_upper = 2*lambda1\n"), 21, "");
    text.replace(text.find("offset = 1\n"), 11, "");
    const ScenarioConfig c = parse_config(text);
    EXPECT_EQ(c.problem.nonlinearity.preset, NonlinearityPreset::linear);
    EXPECT_FALSE(c.problem.nonlinearity.mu_lower.relative_to_lambda1);
    EXPECT_EQ(c.problem.nonlinearity.mu_lower.value, 2.5);
    EXPECT_EQ(c.problem.nonlinearity.offset, 1.0);
}

TEST(Config, MissingFileIsAnIoError) {
    try {
        load_config("/nonexistent/apfold.ini");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::io_error);
    }
}

}  // namespace
