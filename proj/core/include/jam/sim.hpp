#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jam/agents.hpp"
#include "jam/clock.hpp"
#include "jam/record.hpp"
#include "jam/sampling.hpp"
#include "jam/settings.hpp"

namespace jam {

/// Per-leg network delay. The same model is applied independently to the
/// request and the response leg, so a round trip costs two draws.
struct LatencyModel {
    enum class Kind { fixed, uniform, spike };
    Kind kind = Kind::fixed;
    Millis base_ms = 0.0;   // fixed delay, uniform lower bound, spike baseline
    Millis extra_ms = 0.0;  // uniform upper bound, or spike delay
    int period = 1;         // spike: every period-th message is delayed by extra_ms instead

    static LatencyModel fixed(Millis ms) { return {Kind::fixed, ms, 0.0, 1}; }
    static LatencyModel uniform(Millis lo, Millis hi) { return {Kind::uniform, lo, hi, 1}; }
    static LatencyModel spike(Millis base, Millis spike_ms, int every) { return {Kind::spike, base, spike_ms, every}; }

    Millis max_delay() const;
    /// Throws std::invalid_argument on negative delays or bad bounds.
    void validate() const;
    std::string describe() const;

    bool operator==(const LatencyModel&) const = default;
};

/// Parses "fixed:800ms", "uniform:100ms:300ms", "spike:50ms:900ms:10".
/// Durations take ms, frames or beats suffixes (bare numbers are ms); frame
/// and beat units convert at `bpm`.
LatencyModel parse_latency(std::string_view spec, double bpm);

class LatencySampler {
public:
    LatencySampler(LatencyModel model, std::uint64_t seed) : model_(model), rng_(seed) {}
    Millis next();

private:
    LatencyModel model_;
    Rng rng_;
    std::uint64_t count_ = 0;
};

/// Stand-in for the human: notes placed on the frame grid.
struct ScriptNote {
    FrameIndex frame = 0;
    int pitch = 60;
    FrameIndex duration = 1;
    bool operator==(const ScriptNote&) const = default;
};

struct ScriptedMelody {
    std::vector<ScriptNote> notes;

    /// Throws std::invalid_argument on negative frames, pitches outside
    /// [0, 127] or durations below one frame.
    void validate() const;
    /// One past the last frame any note sounds in.
    FrameIndex end_frame() const;
    /// Copies of the script laid end to end, each `period` frames apart.
    ScriptedMelody repeated(int times, FrameIndex period) const;

    bool operator==(const ScriptedMelody&) const = default;
};

/// "frame pitch duration" per line; '#' starts a comment.
ScriptedMelody parse_script(std::string_view text);
std::string format_script(const ScriptedMelody& script);

/// Built-in fixtures.
ScriptedMelody arpeggio_fixture();   // 8-beat C-major arpeggio
ScriptedMelody chromatic_fixture();  // chromatic run, two frames per note
ScriptedMelody sparse_fixture();     // few long notes separated by long rests
/// Named fixture ("arpeggio", "chromatic", "sparse"), if it exists.
std::optional<ScriptedMelody> fixture_by_name(std::string_view name);

/// Random monophonic-ish script, used by property tests.
ScriptedMelody random_script(Rng& rng, FrameIndex frames, int max_notes);

/// Notes recovered from a session's melody grid, for replay.
ScriptedMelody script_from_record(const SessionRecord& record);

struct SettingsChange {
    FrameIndex frame = 0;
    SessionSettings settings;
};

struct SimConfig {
    ScriptedMelody script;
    SessionSettings settings;
    LatencyModel latency;
    /// Seeds the agent (replacing settings.seed) and both latency legs.
    std::uint64_t seed = 0;
    FrameIndex frames = 0;  // simulation horizon
    std::vector<SettingsChange> changes;
};

struct LatencySummary {
    Millis p50 = 0.0;
    Millis p95 = 0.0;
    Millis max = 0.0;
    bool operator==(const LatencySummary&) const = default;
};

struct SimReport {
    std::size_t underruns = 0;
    std::size_t commit_violations = 0;
    double plan_churn = 0.0;           // uncommitted chord changes per simulated frame
    std::size_t plan_changes = 0;
    LatencySummary response_ms;        // client-observed round trips
    std::vector<ChordToken> chords_played;
    FrameIndex frames_simulated = 0;

    std::size_t requests = 0;
    std::size_t wire_errors = 0;
    std::vector<FrameIndex> warm_start_targets;
    std::size_t warm_start_echoes = 0;            // later requests carrying the warm-start history
    std::size_t warm_start_echo_mismatches = 0;   // ... whose history differs from it
    std::size_t max_context_tokens = 0;
    std::size_t silence_chord_onsets = 0;  // chord_on events before the silence period ended
    std::size_t chord_onsets = 0;
    std::vector<Millis> chord_onset_errors_ms;  // |due - time_of_frame(frame)| per chord_on

    SessionRecord record;

    bool operator==(const SimReport&) const = default;
};

/// Virtual-time run of engine and server joined by the latency model. Every
/// message crosses the wire codec. Deterministic in the config. Throws
/// std::invalid_argument for invalid settings, latency or script, and for
/// script notes that start at or beyond the horizon.
SimReport run_sim(const SimConfig& config, const AgentRegistry& agents);

struct SimDiff {
    long long underruns = 0;
    long long commit_violations = 0;
    double plan_churn = 0.0;
    Millis response_p50 = 0.0;
    Millis response_p95 = 0.0;
    Millis response_max = 0.0;
    std::size_t chord_frames_differing = 0;

    bool all_zero() const;
};

/// Deltas b - a. Throws std::invalid_argument on mismatched horizons.
SimDiff compare_runs(const SimReport& a, const SimReport& b);

std::string report_to_json(const SimReport& report);
std::string diff_to_json(const SimDiff& diff);

}  // namespace jam
