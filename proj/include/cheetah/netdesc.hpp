#pragma once

#include "cheetah/ptune.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cheetah {

class UnknownModel : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::size_t line, std::string field)
        : std::runtime_error(what), line_(line), field_(std::move(field))
    {
    }
    std::size_t line() const { return line_; } // 0 when unknown
    const std::string& field() const { return field_; }

  private:
    std::size_t line_;
    std::string field_;
};

class CompositionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Smallest plaintext width a layer asks of the tuner when the file does not say.
inline constexpr int kDefaultPlainBits = 15;

struct NetLayer {
    std::string name;
    LayerSpec spec;
    /// Index of the layer whose output feeds this one; empty means the previous layer.
    std::optional<std::size_t> from;
    int plain_bits = kDefaultPlainBits;

    friend bool operator==(const NetLayer&, const NetLayer&) = default;
};

struct NetworkSpec {
    std::string name;
    std::vector<NetLayer> layers;

    /// Throws CompositionError when a layer cannot consume its source's output.
    void validate() const;
    std::vector<LayerSpec> specs() const;

    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

const std::vector<std::string>& builtin_names();
NetworkSpec builtin(const std::string& name);

/// JSON: {"name": str, "layers": [{"type": "conv", "w", "f", "c_i", "c_o"} | {"type": "fc", "n_i", "n_o"}]},
/// each layer optionally with "name", "from" and "plain_bits".
NetworkSpec parse_network(const std::string& text);
NetworkSpec load_network(const std::string& path);
std::string serialize_network(const NetworkSpec& net);

} // namespace cheetah
