#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wg {

// Daily egress profiles for an inference API user. Each carries the bits
// sent to that user per day; the named constants decompose as
//   text  6*500*10*8          = 240000
//   image +12000000           = 12240000
//   voice +230400000          = 242640000
//   video +9000000000         = 9242640000
enum class UsageProfile {
    TextOnly,
    TextImages,
    TextImagesVoice,
    TextImagesVoiceVideo,
};

// Egress bits/user/day for a named profile.
double egress(UsageProfile profile);

// Accepts "text", "text-images", "text-images-voice",
// "text-images-voice-video", or "custom:<bits>".
double egress_from_name(const std::string& name);
std::string profile_name(UsageProfile profile);

struct RiskScenario {
    double egress_bits_per_user_day = 0.0; // E
    double users = 0.0;                    // N, compromised daily users
    double steg_ratio = 0.0;               // s in (0,1]
    double model_bits = 0.0;               // M
    double compression_ratio = 1.0;        // c in (0,1]
    double detect_p = 0.0;                 // p in [0,1)

    // True when s exceeds the 0.1 cap the estimates assume.
    bool steg_ratio_flagged() const { return steg_ratio > 0.1; }
};

void validate_scenario(const RiskScenario& s);

// T = (M * c) / (E * N * s), in days.
double days_to_exfiltrate(const RiskScenario& s);

// (1 - p)^T with real-valued T; no rounding to whole days.
double success_probability(double days, double detect_p);

struct ExfilTimeline {
    std::vector<double> days;
    std::vector<double> cumulative_bits; // E*N*s*t
    double cross_compressed_days = 0.0;  // when M*c is reached (== T)
    double cross_full_days = 0.0;        // when M is reached
};

ExfilTimeline bits_over_time(const RiskScenario& s, double horizon_days,
                             double step_days);

struct ScenarioGridSpec {
    std::vector<double> users;
    std::vector<double> steg_ratios;
    std::vector<std::string> profiles; // names, see egress_from_name
    std::vector<double> compression_ratios;
    double model_bits = 0.0;
    double detect_p = 0.0;
};

ScenarioGridSpec parse_scenario_grid_json(const std::string& text);

struct ScenarioRow {
    RiskScenario scenario;
    std::string profile;
    double days_compressed = 0.0;
    double days_uncompressed = 0.0; // same scenario with c = 1
    double success_compressed = 0.0;
    double success_uncompressed = 0.0;
};

// Full Cartesian evaluation in declared order. The rows pair compressed
// and uncompressed outcomes per scenario.
std::vector<ScenarioRow> scenario_grid(const ScenarioGridSpec& spec);

// Per-round attacker costs for the dwell-time game. Vectors hold one entry
// per round; rounds = ceil(dwell / refresh interval).
struct CostLedger {
    std::vector<double> compress_flops; // per round
    std::vector<double> align_flops;    // per round
    double finetune_flops = 0.0;
    double train_flops = 0.0;
    double advantage_factor = 0.0; // gamma, in (0,1)
    int64_t rounds = 0;
};

void validate_ledger(const CostLedger& ledger);

double total_attack_flops(const CostLedger& ledger);

// True iff the attacker evaded detection, stayed within dwell, and spent
// strictly less than advantage_factor * train_flops.
bool apt_success(const CostLedger& ledger, bool detected, bool within_dwell);

} // namespace wg
