#include <doctest.h>

#include <sstream>

#include <fxcast/errors.hpp>
#include <fxcast/serialize.hpp>

using namespace fxcast;

namespace {

std::string bytes_of(const Model& m, const Scaler& s) {
    std::ostringstream out(std::ios::binary);
    write_model(out, m, s);
    return out.str();
}

}  // namespace

TEST_CASE("model files round-trip every architecture") {
    for (auto arch : {Architecture::Lstm, Architecture::Bp, Architecture::Rnn}) {
        ModelSpec spec = ModelSpec::desk_profile(arch);
        spec.seed = 17;
        const Model m = init_params(spec);
        const Scaler s(0.705, 0.772);
        const std::string bytes = bytes_of(m, s);
        CHECK(bytes.substr(0, 8) == "FXCMODEL");

        std::istringstream in(bytes, std::ios::binary);
        const ModelFile back = read_model(in);
        CHECK(back.model.spec == spec);
        CHECK(back.scaler == s);
        CHECK(bytes_of(back.model, back.scaler) == bytes);

        const std::vector<double> w{0.71, 0.72, 0.73, 0.74, 0.75, 0.76, 0.75, 0.74, 0.73, 0.72};
        CHECK(predict(back.model, back.scaler, w) == predict(m, s, w));
    }
}

TEST_CASE("corrupt model files are rejected") {
    const Model m = init_params(ModelSpec::desk_profile(Architecture::Rnn));
    const std::string good = bytes_of(m, Scaler(1, 2));

    auto read = [](std::string b) {
        std::istringstream in(b, std::ios::binary);
        return read_model(in);
    };
    std::string bad_magic = good;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(read(bad_magic), DataError);

    std::string bad_version = good;
    bad_version[8] = 9;
    CHECK_THROWS_AS(read(bad_version), DataError);

    CHECK_THROWS_AS(read(good.substr(0, good.size() - 3)), DataError);
    CHECK_THROWS_AS(read(good + "x"), DataError);
    CHECK_THROWS_AS(read(""), DataError);
}

TEST_CASE("missing model file") {
    CHECK_THROWS_AS(load_model("/nonexistent/x.model"), IoError);
}
