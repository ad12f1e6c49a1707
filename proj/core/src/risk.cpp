#include "weightguard/risk.hpp"

#include "weightguard/common.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>

namespace wg {

double egress(UsageProfile profile) {
    switch (profile) {
        case UsageProfile::TextOnly:
            return 240000.0;
        case UsageProfile::TextImages:
            return 12240000.0;
        case UsageProfile::TextImagesVoice:
            return 242640000.0;
        case UsageProfile::TextImagesVoiceVideo:
            return 9242640000.0;
    }
    throw Error("unknown usage profile");
}

double egress_from_name(const std::string& name) {
    if (name == "text") {
        return egress(UsageProfile::TextOnly);
    }
    if (name == "text-images") {
        return egress(UsageProfile::TextImages);
    }
    if (name == "text-images-voice") {
        return egress(UsageProfile::TextImagesVoice);
    }
    if (name == "text-images-voice-video") {
        return egress(UsageProfile::TextImagesVoiceVideo);
    }
    if (name.rfind("custom:", 0) == 0) {
        char* end = nullptr;
        const double e = std::strtod(name.c_str() + 7, &end);
        check(end && *end == '\0' && e > 0.0,
              "custom profile needs a positive bits/day value: " + name);
        return e;
    }
    throw Error("unknown usage profile '" + name +
                "' (expected text, text-images, text-images-voice, "
                "text-images-voice-video, or custom:<bits>)");
}

std::string profile_name(UsageProfile profile) {
    switch (profile) {
        case UsageProfile::TextOnly:
            return "text";
        case UsageProfile::TextImages:
            return "text-images";
        case UsageProfile::TextImagesVoice:
            return "text-images-voice";
        case UsageProfile::TextImagesVoiceVideo:
            return "text-images-voice-video";
    }
    throw Error("unknown usage profile");
}

void validate_scenario(const RiskScenario& s) {
    check(s.egress_bits_per_user_day > 0.0,
          "scenario: egress bits/user/day must be positive");
    check(s.users > 0.0, "scenario: compromised users must be positive");
    check(s.steg_ratio > 0.0 && s.steg_ratio <= 1.0,
          "scenario: steganography ratio must be in (0,1]");
    check(s.model_bits > 0.0, "scenario: model size must be positive");
    check(s.compression_ratio > 0.0 && s.compression_ratio <= 1.0,
          "scenario: compression ratio must be in (0,1]");
    check(s.detect_p >= 0.0 && s.detect_p < 1.0,
          "scenario: detection probability must be in [0,1)");
}

double days_to_exfiltrate(const RiskScenario& s) {
    validate_scenario(s);
    return (s.model_bits * s.compression_ratio) /
           (s.egress_bits_per_user_day * s.users * s.steg_ratio);
}

double success_probability(double days, double detect_p) {
    check(days >= 0.0, "success_probability: negative exfiltration time");
    check(detect_p >= 0.0 && detect_p < 1.0,
          "success_probability: detection probability must be in [0,1)");
    return std::pow(1.0 - detect_p, days);
}

ExfilTimeline bits_over_time(const RiskScenario& s, double horizon_days,
                             double step_days) {
    validate_scenario(s);
    check(horizon_days > 0.0, "bits_over_time: horizon must be positive");
    check(step_days > 0.0, "bits_over_time: step must be positive");
    const double rate =
            s.egress_bits_per_user_day * s.users * s.steg_ratio;
    ExfilTimeline tl;
    for (double t = step_days; t <= horizon_days + 1e-12; t += step_days) {
        tl.days.push_back(t);
        tl.cumulative_bits.push_back(rate * t);
    }
    tl.cross_compressed_days = days_to_exfiltrate(s);
    tl.cross_full_days = s.model_bits / rate;
    return tl;
}

ScenarioGridSpec parse_scenario_grid_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed scenario grid: ") + e.what());
    }
    ScenarioGridSpec spec;
    try {
        for (const auto& v : j.at("users")) {
            spec.users.push_back(v.get<double>());
        }
        for (const auto& v : j.at("steg")) {
            spec.steg_ratios.push_back(v.get<double>());
        }
        for (const auto& v : j.at("profiles")) {
            spec.profiles.push_back(v.get<std::string>());
        }
        for (const auto& v : j.at("compression")) {
            spec.compression_ratios.push_back(v.get<double>());
        }
        spec.model_bits = j.at("model_bits").get<double>();
        spec.detect_p = j.at("detect_p").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed scenario grid field: ") +
                    e.what());
    }
    return spec;
}

std::vector<ScenarioRow> scenario_grid(const ScenarioGridSpec& spec) {
    check(!spec.users.empty() && !spec.steg_ratios.empty() &&
                  !spec.profiles.empty() &&
                  !spec.compression_ratios.empty(),
          "scenario grid: empty range");
    std::vector<ScenarioRow> rows;
    for (const std::string& prof : spec.profiles) {
        const double e = egress_from_name(prof);
        for (double n : spec.users) {
            for (double s : spec.steg_ratios) {
                for (double c : spec.compression_ratios) {
                    ScenarioRow row;
                    row.profile = prof;
                    row.scenario.egress_bits_per_user_day = e;
                    row.scenario.users = n;
                    row.scenario.steg_ratio = s;
                    row.scenario.model_bits = spec.model_bits;
                    row.scenario.compression_ratio = c;
                    row.scenario.detect_p = spec.detect_p;
                    row.days_compressed = days_to_exfiltrate(row.scenario);
                    RiskScenario full = row.scenario;
                    full.compression_ratio = 1.0;
                    row.days_uncompressed = days_to_exfiltrate(full);
                    row.success_compressed = success_probability(
                            row.days_compressed, spec.detect_p);
                    row.success_uncompressed = success_probability(
                            row.days_uncompressed, spec.detect_p);
                    rows.push_back(row);
                }
            }
        }
    }
    return rows;
}

void validate_ledger(const CostLedger& ledger) {
    check(ledger.rounds >= 1, "cost ledger: rounds must be >= 1");
    check(ledger.compress_flops.size() ==
                          static_cast<size_t>(ledger.rounds) &&
                  ledger.align_flops.size() ==
                          static_cast<size_t>(ledger.rounds),
          "cost ledger: per-round vectors must have `rounds` entries");
    for (double v : ledger.compress_flops) {
        check(v >= 0.0, "cost ledger: negative compression cost");
    }
    for (double v : ledger.align_flops) {
        check(v >= 0.0, "cost ledger: negative alignment cost");
    }
    check(ledger.finetune_flops >= 0.0,
          "cost ledger: negative finetune cost");
    check(ledger.train_flops >= 0.0, "cost ledger: negative training cost");
    check(ledger.advantage_factor > 0.0 && ledger.advantage_factor < 1.0,
          "cost ledger: advantage factor must be in (0,1)");
}

double total_attack_flops(const CostLedger& ledger) {
    double total = ledger.finetune_flops;
    for (size_t t = 0; t < ledger.compress_flops.size(); ++t) {
        total += ledger.compress_flops[t] + ledger.align_flops[t];
    }
    return total;
}

bool apt_success(const CostLedger& ledger, bool detected, bool within_dwell) {
    validate_ledger(ledger);
    if (detected || !within_dwell) {
        return false;
    }
    return total_attack_flops(ledger) <
           ledger.advantage_factor * ledger.train_flops;
}

} // namespace wg
