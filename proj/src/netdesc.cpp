#include "cheetah/netdesc.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace cheetah {

using nlohmann::json;

namespace {

class Builder {
  public:
    explicit Builder(std::string name) { net_.name = std::move(name); }

    std::size_t conv(const std::string& name, int w, int f, int ci, int co, std::optional<std::size_t> from = {})
    {
        net_.layers.push_back(NetLayer{name, LayerSpec::cnn(w, f, ci, co), from, kDefaultPlainBits});
        return net_.layers.size() - 1;
    }
    std::size_t fc(const std::string& name, int ni, int no)
    {
        net_.layers.push_back(NetLayer{name, LayerSpec::fc(ni, no), std::nullopt, kDefaultPlainBits});
        return net_.layers.size() - 1;
    }
    std::size_t last() const { return net_.layers.size() - 1; }

    NetworkSpec done() &&
    {
        net_.validate();
        return std::move(net_);
    }

  private:
    NetworkSpec net_;
};

NetworkSpec lenet300()
{
    Builder b("lenet300");
    b.fc("fc1", 784, 300);
    b.fc("fc2", 300, 100);
    b.fc("fc3", 100, 10);
    return std::move(b).done();
}

NetworkSpec lenet5()
{
    Builder b("lenet5");
    b.conv("conv1", 28, 5, 1, 20);
    b.conv("conv2", 14, 5, 20, 50);
    b.fc("fc1", 7 * 7 * 50, 500);
    b.fc("fc2", 500, 10);
    return std::move(b).done();
}

NetworkSpec alexnet()
{
    Builder b("alexnet");
    b.conv("conv1", 55, 11, 3, 96);
    b.conv("conv2", 27, 5, 96, 256);
    b.conv("conv3", 13, 3, 256, 384);
    b.conv("conv4", 13, 3, 384, 384);
    b.conv("conv5", 13, 3, 384, 256);
    b.fc("fc6", 6 * 6 * 256, 4096);
    b.fc("fc7", 4096, 4096);
    b.fc("fc8", 4096, 1000);
    return std::move(b).done();
}

NetworkSpec vgg16()
{
    Builder b("vgg16");
    const int widths[] = {224, 112, 56, 28, 14};
    const int channels[] = {64, 128, 256, 512, 512};
    const int depth[] = {2, 2, 3, 3, 3};
    int c = 3;
    for (int s = 0; s < 5; ++s) {
        for (int k = 0; k < depth[s]; ++k) {
            b.conv("conv" + std::to_string(s + 1) + "_" + std::to_string(k + 1), widths[s], 3, c, channels[s]);
            c = channels[s];
        }
    }
    b.fc("fc6", 7 * 7 * 512, 4096);
    b.fc("fc7", 4096, 4096);
    b.fc("fc8", 4096, 1000);
    return std::move(b).done();
}

// bottleneck blocks; spatial sizes rounded up to powers of two
NetworkSpec resnet50()
{
    Builder b("resnet50");
    b.conv("conv1", 128, 7, 3, 64);
    const int widths[] = {64, 32, 16, 8};
    const int mids[] = {64, 128, 256, 512};
    const int blocks[] = {3, 4, 6, 3};
    int c = 64;
    for (int s = 0; s < 4; ++s) {
        const int out = 4 * mids[s];
        for (int k = 0; k < blocks[s]; ++k) {
            const std::string tag = "res" + std::to_string(s + 2) + static_cast<char>('a' + k);
            const std::size_t block_in = b.last();
            b.conv(tag + "_1x1a", widths[s], 1, c, mids[s]);
            b.conv(tag + "_3x3", widths[s], 3, mids[s], mids[s]);
            b.conv(tag + "_1x1b", widths[s], 1, mids[s], out);
            if (k == 0) {
                b.conv(tag + "_proj", widths[s], 1, c, out, block_in);
            }
            c = out;
        }
    }
    b.fc("fc", 2048, 1000);
    return std::move(b).done();
}

// output of `src` as (channels, width) for images, (n, 1) for vectors
void check_feeds(const NetLayer& src, const NetLayer& dst, std::size_t idx)
{
    const LayerSpec& a = src.spec;
    const LayerSpec& b = dst.spec;
    const std::string where = "layer " + std::to_string(idx) + " (" + dst.name + ")";
    if (a.kind == LayerKind::cnn && b.kind == LayerKind::cnn) {
        if (b.c_i != a.c_o || b.w > a.w) {
            throw CompositionError(where + ": expects " + std::to_string(b.c_i) + "x" + std::to_string(b.w) +
                                   " input, source gives " + std::to_string(a.c_o) + "x" + std::to_string(a.w));
        }
    } else if (a.kind == LayerKind::cnn) {
        // flatten after client-side pooling to some v <= w
        bool ok = false;
        for (int v = 1; v <= a.w && !ok; ++v) {
            ok = static_cast<long>(a.c_o) * v * v == b.n_i;
        }
        if (!ok) {
            throw CompositionError(where + ": n_i=" + std::to_string(b.n_i) + " is not " + std::to_string(a.c_o) +
                                   " channels of a square map");
        }
    } else if (b.kind == LayerKind::fc) {
        if (b.n_i != a.n_o) {
            throw CompositionError(where + ": n_i=" + std::to_string(b.n_i) + " but source n_o=" + std::to_string(a.n_o));
        }
    } else if (static_cast<long>(b.c_i) * b.w * b.w != a.n_o) {
        throw CompositionError(where + ": c_i*w*w does not match source n_o=" + std::to_string(a.n_o));
    }
}

std::size_t line_of(const std::string& text, std::size_t byte)
{
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(std::min(byte, text.size())), '\n'));
}

int positive_int(const json& obj, const char* key, const std::string& path)
{
    const std::string field = path + "." + key;
    if (!obj.contains(key)) {
        throw ParseError(field + ": missing", 0, field);
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0 || v.get<long long>() > (1LL << 30)) {
        throw ParseError(field + ": expected a positive integer", 0, field);
    }
    return v.get<int>();
}

} // namespace

void NetworkSpec::validate() const
{
    if (layers.empty()) {
        throw CompositionError("network '" + name + "' has no layers");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const NetLayer& l = layers[i];
        try {
            l.spec.validate();
        } catch (const std::invalid_argument& e) {
            throw CompositionError("layer " + std::to_string(i) + " (" + l.name + "): " + e.what());
        }
        if (l.plain_bits < 1 || l.plain_bits > 60) {
            throw CompositionError("layer " + std::to_string(i) + ": plain_bits out of range");
        }
        if (l.from && *l.from >= i) {
            throw CompositionError("layer " + std::to_string(i) + ": source must be an earlier layer");
        }
        if (i == 0) {
            if (l.from) {
                throw CompositionError("layer 0 cannot name a source");
            }
            continue;
        }
        check_feeds(layers[l.from.value_or(i - 1)], l, i);
    }
}

std::vector<LayerSpec> NetworkSpec::specs() const
{
    std::vector<LayerSpec> out;
    for (const auto& l : layers) {
        out.push_back(l.spec);
    }
    return out;
}

const std::vector<std::string>& builtin_names()
{
    static const std::vector<std::string> names = {"lenet300", "lenet5", "alexnet", "vgg16", "resnet50"};
    return names;
}

NetworkSpec builtin(const std::string& name)
{
    if (name == "lenet300") {
        return lenet300();
    }
    if (name == "lenet5") {
        return lenet5();
    }
    if (name == "alexnet") {
        return alexnet();
    }
    if (name == "vgg16") {
        return vgg16();
    }
    if (name == "resnet50") {
        return resnet50();
    }
    throw UnknownModel("unknown model '" + name + "'");
}

NetworkSpec parse_network(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), line_of(text, e.byte), "");
    }
    if (!doc.is_object()) {
        throw ParseError("top level must be an object", 1, "");
    }
    NetworkSpec net;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) {
            throw ParseError("name: expected a string", 0, "name");
        }
        net.name = doc["name"].get<std::string>();
    }
    if (!doc.contains("layers") || !doc["layers"].is_array()) {
        throw ParseError("layers: expected an array", 0, "layers");
    }
    const json& layers = doc["layers"];
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const json& l = layers[i];
        const std::string path = "layers[" + std::to_string(i) + "]";
        if (!l.is_object()) {
            throw ParseError(path + ": expected an object", 0, path);
        }
        if (!l.contains("type") || !l["type"].is_string()) {
            throw ParseError(path + ".type: expected \"conv\" or \"fc\"", 0, path + ".type");
        }
        const std::string type = l["type"].get<std::string>();
        NetLayer nl;
        if (type == "conv") {
            nl.spec = LayerSpec::cnn(positive_int(l, "w", path), positive_int(l, "f", path), positive_int(l, "c_i", path),
                                     positive_int(l, "c_o", path));
        } else if (type == "fc") {
            nl.spec = LayerSpec::fc(positive_int(l, "n_i", path), positive_int(l, "n_o", path));
        } else {
            throw ParseError(path + ".type: unknown layer type '" + type + "'", 0, path + ".type");
        }
        nl.name = l.contains("name") && l["name"].is_string() ? l["name"].get<std::string>() : type + std::to_string(i);
        if (l.contains("from")) {
            if (!l["from"].is_number_unsigned()) {
                throw ParseError(path + ".from: expected a layer index", 0, path + ".from");
            }
            nl.from = l["from"].get<std::size_t>();
        }
        if (l.contains("plain_bits")) {
            nl.plain_bits = positive_int(l, "plain_bits", path);
        }
        net.layers.push_back(std::move(nl));
    }
    net.validate();
    return net;
}

NetworkSpec load_network(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open network file " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_network(ss.str());
}

std::string serialize_network(const NetworkSpec& net)
{
    json doc;
    doc["name"] = net.name;
    doc["layers"] = json::array();
    for (const auto& l : net.layers) {
        json j;
        j["name"] = l.name;
        if (l.spec.kind == LayerKind::cnn) {
            j["type"] = "conv";
            j["w"] = l.spec.w;
            j["f"] = l.spec.f_w;
            j["c_i"] = l.spec.c_i;
            j["c_o"] = l.spec.c_o;
        } else {
            j["type"] = "fc";
            j["n_i"] = l.spec.n_i;
            j["n_o"] = l.spec.n_o;
        }
        if (l.from) {
            j["from"] = *l.from;
        }
        j["plain_bits"] = l.plain_bits;
        doc["layers"].push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

} // namespace cheetah
