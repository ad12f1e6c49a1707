#include "weightguard/synth.hpp"

#include "weightguard/common.hpp"
#include "weightguard/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

namespace wg {

namespace {

struct ParsedSpec {
    std::string name;
    std::vector<double> args;
};

ParsedSpec parse_spec(const std::string& spec) {
    const auto open = spec.find('(');
    check(open != std::string::npos && spec.back() == ')',
          "distribution spec must look like name(arg,...): " + spec);
    ParsedSpec p;
    p.name = spec.substr(0, open);
    std::string args = spec.substr(open + 1, spec.size() - open - 2);
    size_t pos = 0;
    while (pos < args.size()) {
        size_t comma = args.find(',', pos);
        if (comma == std::string::npos) {
            comma = args.size();
        }
        const std::string tok = args.substr(pos, comma - pos);
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        check(end && *end == '\0' && !tok.empty(),
              "bad numeric argument '" + tok + "' in spec: " + spec);
        check(std::isfinite(v), "non-finite argument in spec: " + spec);
        p.args.push_back(v);
        pos = comma + 1;
    }
    return p;
}

} // namespace

WeightMatrix synth_weights(int64_t rows, int64_t cols,
                           const std::string& distribution_spec,
                           uint64_t seed, std::string name) {
    check(rows >= 1 && cols >= 1, "synth_weights: dimensions must be >= 1");
    const ParsedSpec spec = parse_spec(distribution_spec);

    RngStream rng(seed, "synth");
    std::vector<float> values(static_cast<size_t>(rows * cols));
    if (spec.name == "gaussian") {
        check(spec.args.size() == 2, "gaussian expects (mean,std)");
        check(spec.args[1] >= 0, "gaussian std must be non-negative");
        for (auto& v : values) {
            v = static_cast<float>(spec.args[0] +
                                   spec.args[1] * rng.gaussian());
        }
    } else if (spec.name == "constant") {
        check(spec.args.size() == 1, "constant expects (value)");
        for (auto& v : values) {
            v = static_cast<float>(spec.args[0]);
        }
    } else if (spec.name == "uniform") {
        check(spec.args.size() == 2 && spec.args[0] <= spec.args[1],
              "uniform expects (lo,hi) with lo <= hi");
        for (auto& v : values) {
            v = static_cast<float>(spec.args[0] +
                                   (spec.args[1] - spec.args[0]) *
                                           rng.next_double());
        }
    } else {
        throw Error("unknown distribution name: " + spec.name);
    }
    return make_weight_matrix(std::move(name), rows, cols, std::move(values));
}

} // namespace wg
