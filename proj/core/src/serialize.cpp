#include "fxcast/serialize.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include <fmt/format.h>

#include "fxcast/errors.hpp"

namespace fxcast {

namespace {

constexpr std::array<char, 8> kMagic{'F', 'X', 'C', 'M', 'O', 'D', 'E', 'L'};

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }

    void u32(std::uint32_t v) { little_endian(v, 4); }
    void u64(std::uint64_t v) { little_endian(v, 8); }
    void f64(double v) { little_endian(std::bit_cast<std::uint64_t>(v), 8); }

private:
    void little_endian(std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) {
            out_.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
        }
    }

    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(little_endian(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(little_endian(4)); }
    std::uint64_t u64() { return little_endian(8); }
    double f64() { return std::bit_cast<double>(little_endian(8)); }

private:
    std::uint64_t little_endian(int bytes) {
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) {
            const int c = in_.get();
            if (c == std::char_traits<char>::eof()) {
                throw DataError("model file is truncated");
            }
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
        }
        return v;
    }

    std::istream& in_;
};

std::uint8_t activation_code(Activation a) { return static_cast<std::uint8_t>(a); }

Activation activation_from(std::uint8_t code) {
    if (code > static_cast<std::uint8_t>(Activation::Linear)) {
        throw DataError(fmt::format("model file has unknown activation code {}", code));
    }
    return static_cast<Activation>(code);
}

std::uint8_t architecture_code(Architecture a) { return static_cast<std::uint8_t>(a); }

Architecture architecture_from(std::uint8_t code) {
    if (code > static_cast<std::uint8_t>(Architecture::Rnn)) {
        throw DataError(fmt::format("model file has unknown architecture code {}", code));
    }
    return static_cast<Architecture>(code);
}

}  // namespace

void write_model(std::ostream& out, const Model& model, const Scaler& scaler) {
    const auto& spec = model.spec;
    Writer w(out);
    out.write(kMagic.data(), kMagic.size());
    w.u32(kModelFormatVersion);
    w.u8(architecture_code(spec.architecture));
    w.u64(spec.window_len);
    w.u64(spec.hidden_layers);
    w.u64(spec.hidden_size);
    w.u8(activation_code(spec.input_activation));
    w.u8(activation_code(spec.hidden_activation));
    w.u8(activation_code(spec.output_activation));
    w.f64(spec.dropout_rate);
    w.u64(spec.seed);
    w.f64(scaler.x_min());
    w.f64(scaler.x_max());
    w.u64(parameter_count(model.params));
    for_each_array(model.params, [&](const std::string&, std::span<const double> values) {
        for (double v : values) {
            w.f64(v);
        }
    });
    if (!out) {
        throw IoError("failed to write model");
    }
}

ModelFile read_model(std::istream& in) {
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kMagic) {
        throw DataError("not a model file (bad magic)");
    }
    Reader r(in);
    const auto version = r.u32();
    if (version != kModelFormatVersion) {
        throw DataError(fmt::format("unsupported model format version {}", version));
    }
    ModelSpec spec;
    spec.architecture = architecture_from(r.u8());
    spec.window_len = r.u64();
    spec.hidden_layers = r.u64();
    spec.hidden_size = r.u64();
    spec.input_activation = activation_from(r.u8());
    spec.hidden_activation = activation_from(r.u8());
    spec.output_activation = activation_from(r.u8());
    spec.dropout_rate = r.f64();
    spec.seed = r.u64();
    const double x_min = r.f64();
    const double x_max = r.f64();
    const auto count = r.u64();

    try {
        spec.validate();
    } catch (const ConfigError& e) {
        throw DataError(fmt::format("model file holds an invalid spec: {}", e.what()));
    }
    if (spec.hidden_size > (1u << 16) || spec.hidden_layers > 1024 || spec.window_len > (1u << 20)) {
        throw DataError("model file spec is implausibly large");
    }
    std::optional<Scaler> scaler;
    try {
        scaler.emplace(x_min, x_max);
    } catch (const ConfigError& e) {
        throw DataError(fmt::format("model file holds an invalid scaler: {}", e.what()));
    }

    Model model = init_params(spec);
    if (count != parameter_count(model.params)) {
        throw DataError(fmt::format("model file declares {} parameters, spec implies {}", count,
                                    parameter_count(model.params)));
    }
    for_each_array(model.params, [&](const std::string&, std::span<double> values) {
        for (double& v : values) {
            v = r.f64();
        }
    });
    if (in.peek() != std::char_traits<char>::eof()) {
        throw DataError("model file has trailing bytes");
    }
    return ModelFile{std::move(model), *scaler};
}

void save_model(const std::string& path, const Model& model, const Scaler& scaler) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot open '{}' for writing", path));
    }
    write_model(out, model, scaler);
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot open '{}'", path));
    }
    return read_model(in);
}

}  // namespace fxcast
