#include "cheetah/netdesc.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace cheetah;

#ifndef CHEETAH_TEST_DATA
#define CHEETAH_TEST_DATA "tests/data"
#endif

TEST(Builtin, ResnetHasTheLargeThreeByThree)
{
    const NetworkSpec net = builtin("resnet50");
    const auto specs = net.specs();
    EXPECT_NE(std::find(specs.begin(), specs.end(), LayerSpec::cnn(64, 3, 64, 64)), specs.end());
    EXPECT_EQ(net.layers.size(), 54u);
}

TEST(Builtin, Lenet300)
{
    const auto specs = builtin("lenet300").specs();
    ASSERT_EQ(specs.size(), 3u);
    EXPECT_EQ(specs[0], LayerSpec::fc(784, 300));
    EXPECT_EQ(specs[1], LayerSpec::fc(300, 100));
    EXPECT_EQ(specs[2], LayerSpec::fc(100, 10));
}

TEST(Builtin, UnknownName) { EXPECT_THROW(builtin("googlenet"), UnknownModel); }

TEST(Builtin, AllComposeAndRoundTrip)
{
    for (const auto& name : builtin_names()) {
        const NetworkSpec net = builtin(name);
        EXPECT_NO_THROW(net.validate()) << name;
        EXPECT_EQ(parse_network(serialize_network(net)), net) << name;
    }
}

TEST(Parse, ToyFile)
{
    const NetworkSpec net = load_network(std::string(CHEETAH_TEST_DATA) + "/toy_net.json");
    EXPECT_EQ(net.name, "toy");
    ASSERT_EQ(net.layers.size(), 2u);
    EXPECT_EQ(net.layers[0].spec, LayerSpec::cnn(8, 3, 1, 4));
    EXPECT_EQ(net.layers[0].name, "c1");
    EXPECT_EQ(net.layers[1].spec, LayerSpec::fc(64, 10));
    EXPECT_EQ(net.layers[1].plain_bits, 18);
    EXPECT_EQ(net.layers[0].plain_bits, kDefaultPlainBits);
}

TEST(Parse, ChannelMismatch)
{
    const char* text = R"({"layers": [{"type": "conv", "w": 8, "f": 3, "c_i": 1, "c_o": 4},
                                      {"type": "conv", "w": 8, "f": 3, "c_i": 5, "c_o": 4}]})";
    EXPECT_THROW(parse_network(text), CompositionError);
}

TEST(Parse, FlattenMismatch)
{
    const char* text = R"({"layers": [{"type": "conv", "w": 8, "f": 3, "c_i": 1, "c_o": 4},
                                      {"type": "fc", "n_i": 65, "n_o": 4}]})";
    EXPECT_THROW(parse_network(text), CompositionError);
}

TEST(Parse, ReportsLineOfSyntaxError)
{
    const char* text = "{\n  \"layers\": [\n    {\"type\": \"fc\", \"n_i\": 3,, \"n_o\": 4}\n  ]\n}\n";
    try {
        parse_network(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Parse, ReportsField)
{
    const char* text = R"({"layers": [{"type": "fc", "n_i": 3, "n_o": 4}, {"type": "fc", "n_i": 4, "n_o": -2}]})";
    try {
        parse_network(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.field(), "layers[1].n_o");
    }
    EXPECT_THROW(parse_network(R"({"layers": [{"type": "pool"}]})"), ParseError);
    EXPECT_THROW(parse_network(R"({"layers": 3})"), ParseError);
    EXPECT_THROW(parse_network(R"({"layers": []})"), CompositionError);
}

TEST(Parse, SourceMustBeEarlier)
{
    const char* text = R"({"layers": [{"type": "fc", "n_i": 3, "n_o": 4}, {"type": "fc", "n_i": 4, "n_o": 4, "from": 1}]})";
    EXPECT_THROW(parse_network(text), CompositionError);
}
