#include "jam/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "jam/engine.hpp"
#include "jam/kv.hpp"
#include "jam/server.hpp"
#include "jam/wire.hpp"

namespace jam {
namespace {

constexpr Millis kSimOrigin = 1000.0;

Millis parse_duration(std::string_view s, double bpm) {
    auto ends_with = [&](std::string_view suffix) {
        return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
    };
    for (std::string_view suffix : {"beats", "beat"}) {
        if (ends_with(suffix)) {
            return parse_double(s.substr(0, s.size() - suffix.size())) * kFramesPerBeat * frame_duration_ms(bpm);
        }
    }
    for (std::string_view suffix : {"frames", "frame"}) {
        if (ends_with(suffix)) return parse_double(s.substr(0, s.size() - suffix.size())) * frame_duration_ms(bpm);
    }
    if (ends_with("ms")) return parse_double(s.substr(0, s.size() - 2));
    return parse_double(s);
}

Millis percentile(std::vector<Millis> values, double p) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

enum class EventType { note_off, note_on, settings, tick, server_arrival, client_arrival };

struct SimEvent {
    Millis time = 0.0;
    EventType type = EventType::tick;
    std::uint64_t seq = 0;
    int pitch = 0;
    std::size_t change = 0;
    std::string body;
};

struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.type != b.type) return a.type > b.type;
        return a.seq > b.seq;
    }
};

}  // namespace

Millis LatencyModel::max_delay() const {
    switch (kind) {
        case Kind::fixed: return base_ms;
        case Kind::uniform: return extra_ms;
        case Kind::spike: return std::max(base_ms, extra_ms);
    }
    return base_ms;
}

void LatencyModel::validate() const {
    if (!(base_ms >= 0.0) || !(extra_ms >= 0.0) || !std::isfinite(base_ms) || !std::isfinite(extra_ms)) {
        throw std::invalid_argument("latency delays must be finite and non-negative");
    }
    if (kind == Kind::uniform && extra_ms < base_ms) {
        throw std::invalid_argument("uniform latency upper bound below lower bound");
    }
    if (kind == Kind::spike && period < 1) throw std::invalid_argument("spike period must be >= 1");
}

std::string LatencyModel::describe() const {
    switch (kind) {
        case Kind::fixed: return "fixed:" + format_double(base_ms) + "ms";
        case Kind::uniform: return "uniform:" + format_double(base_ms) + "ms:" + format_double(extra_ms) + "ms";
        case Kind::spike:
            return "spike:" + format_double(base_ms) + "ms:" + format_double(extra_ms) + "ms:" + std::to_string(period);
    }
    return "?";
}

LatencyModel parse_latency(std::string_view spec, double bpm) {
    const auto parts = split_fields(spec, ':');
    if (parts.empty()) throw std::invalid_argument("empty latency spec");
    LatencyModel model;
    try {
        if (parts[0] == "fixed" && parts.size() == 2) {
            model = LatencyModel::fixed(parse_duration(parts[1], bpm));
        } else if (parts[0] == "uniform" && parts.size() == 3) {
            model = LatencyModel::uniform(parse_duration(parts[1], bpm), parse_duration(parts[2], bpm));
        } else if (parts[0] == "spike" && parts.size() == 4) {
            const auto every = parse_int(parts[3]);
            if (every < 1 || every > 1'000'000) throw std::invalid_argument("spike period out of range");
            model = LatencyModel::spike(parse_duration(parts[1], bpm), parse_duration(parts[2], bpm),
                                        static_cast<int>(every));
        } else {
            throw std::invalid_argument("unrecognized latency spec");
        }
    } catch (const KvError& e) {
        throw std::invalid_argument("bad latency spec '" + std::string(spec) + "': " + e.what());
    }
    model.validate();
    return model;
}

Millis LatencySampler::next() {
    ++count_;
    switch (model_.kind) {
        case LatencyModel::Kind::fixed: return model_.base_ms;
        case LatencyModel::Kind::uniform:
            return model_.base_ms + rng_.next_unit() * (model_.extra_ms - model_.base_ms);
        case LatencyModel::Kind::spike:
            return count_ % static_cast<std::uint64_t>(model_.period) == 0 ? model_.extra_ms : model_.base_ms;
    }
    return model_.base_ms;
}

void ScriptedMelody::validate() const {
    for (const auto& n : notes) {
        if (n.frame < 0) throw std::invalid_argument("script note at a negative frame");
        if (n.pitch < 0 || n.pitch > 127) throw std::invalid_argument("script pitch out of range");
        if (n.duration < 1) throw std::invalid_argument("script note shorter than one frame");
    }
}

FrameIndex ScriptedMelody::end_frame() const {
    FrameIndex end = 0;
    for (const auto& n : notes) end = std::max(end, n.frame + n.duration);
    return end;
}

ScriptedMelody ScriptedMelody::repeated(int times, FrameIndex period) const {
    ScriptedMelody out;
    for (int k = 0; k < times; ++k) {
        for (auto n : notes) {
            n.frame += period * k;
            out.notes.push_back(n);
        }
    }
    return out;
}

ScriptedMelody parse_script(std::string_view text) {
    ScriptedMelody script;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        ScriptNote note;
        if (!(fields >> note.frame)) continue;
        if (!(fields >> note.pitch >> note.duration)) {
            throw std::invalid_argument("script line " + std::to_string(line_no) + ": expected 'frame pitch duration'");
        }
        std::string extra;
        if (fields >> extra) throw std::invalid_argument("script line " + std::to_string(line_no) + ": trailing text");
        script.notes.push_back(note);
    }
    script.validate();
    return script;
}

std::string format_script(const ScriptedMelody& script) {
    std::string out;
    for (const auto& n : script.notes) {
        out += std::to_string(n.frame) + " " + std::to_string(n.pitch) + " " + std::to_string(n.duration) + "\n";
    }
    return out;
}

ScriptedMelody arpeggio_fixture() {
    ScriptedMelody s;
    const int pitches[] = {60, 64, 67, 72, 67, 64, 60, 55};
    for (int i = 0; i < 8; ++i) s.notes.push_back({FrameIndex{i} * kFramesPerBeat, pitches[i], 3});
    return s;
}

ScriptedMelody chromatic_fixture() {
    ScriptedMelody s;
    for (int i = 0; i < 24; ++i) s.notes.push_back({FrameIndex{i} * 2, 60 + i, 2});
    return s;
}

ScriptedMelody sparse_fixture() {
    return ScriptedMelody{{{0, 62, 8}, {20, 65, 4}, {40, 69, 12}, {72, 67, 6}, {100, 62, 4}}};
}

std::optional<ScriptedMelody> fixture_by_name(std::string_view name) {
    if (name == "arpeggio") return arpeggio_fixture();
    if (name == "chromatic") return chromatic_fixture();
    if (name == "sparse") return sparse_fixture();
    return std::nullopt;
}

ScriptedMelody random_script(Rng& rng, FrameIndex frames, int max_notes) {
    ScriptedMelody s;
    const int count = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(std::max(1, max_notes)));
    for (int i = 0; i < count; ++i) {
        ScriptNote n;
        n.frame = i == 0 ? 0 : static_cast<FrameIndex>(rng.next_u64() % static_cast<std::uint64_t>(frames));
        n.pitch = 48 + static_cast<int>(rng.next_u64() % 37);
        n.duration = 1 + static_cast<FrameIndex>(rng.next_u64() % 8);
        s.notes.push_back(n);
    }
    std::stable_sort(s.notes.begin(), s.notes.end(),
                     [](const ScriptNote& a, const ScriptNote& b) { return a.frame < b.frame; });
    return s;
}

ScriptedMelody script_from_record(const SessionRecord& record) {
    ScriptedMelody s;
    for (std::size_t f = 0; f < record.melody.size(); ++f) {
        if (!record.melody[f].is_onset()) continue;
        FrameIndex duration = 1;
        while (f + static_cast<std::size_t>(duration) < record.melody.size() &&
               record.melody[f + static_cast<std::size_t>(duration)].is_hold()) {
            ++duration;
        }
        s.notes.push_back({static_cast<FrameIndex>(f), record.melody[f].pitch(), duration});
    }
    return s;
}

SimReport run_sim(const SimConfig& config, const AgentRegistry& agents) {
    SessionSettings settings = config.settings;
    settings.seed = config.seed;
    if (auto problem = settings.validate()) throw std::invalid_argument(*problem);
    if (agents.find(settings.model_id) == nullptr) {
        throw std::invalid_argument("unknown model '" + settings.model_id + "'");
    }
    config.latency.validate();
    config.script.validate();
    if (config.frames <= 0) throw std::invalid_argument("simulation horizon must be positive");
    if (config.script.notes.empty()) throw std::invalid_argument("script has no notes");
    for (const auto& n : config.script.notes) {
        if (n.frame >= config.frames) {
            throw std::invalid_argument("script note at frame " + std::to_string(n.frame) +
                                        " lies beyond the simulation horizon");
        }
    }
    for (const auto& c : config.changes) {
        if (c.settings.bpm != settings.bpm) throw std::invalid_argument("settings change may not alter bpm");
    }

    // The first note defines frame 0.
    FrameIndex shift = config.script.notes.front().frame;
    for (const auto& n : config.script.notes) shift = std::min(shift, n.frame);

    const FrameClock grid(settings.bpm, kSimOrigin);
    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue;
    std::uint64_t seq = 0;
    auto push = [&](SimEvent ev) {
        ev.seq = seq++;
        queue.push(std::move(ev));
    };
    for (const auto& n : config.script.notes) {
        push({grid.time_of_frame(n.frame - shift), EventType::note_on, 0, n.pitch, 0, {}});
        push({grid.time_of_frame(n.frame - shift + n.duration), EventType::note_off, 0, n.pitch, 0, {}});
    }
    for (std::size_t i = 0; i < config.changes.size(); ++i) {
        push({grid.time_of_frame(config.changes[i].frame), EventType::settings, 0, 0, i, {}});
    }
    for (FrameIndex f = 0; f < config.frames; ++f) push({grid.time_of_frame(f), EventType::tick, 0, 0, 0, {}});
    const Millis end_time = grid.time_of_frame(config.frames - 1);

    SessionEngine engine(settings, "sim");
    VirtualClock server_clock(kSimOrigin);
    LatencySampler request_leg(config.latency, splitmix64(config.seed ^ 0x5eed0001ULL));
    LatencySampler response_leg(config.latency, splitmix64(config.seed ^ 0x5eed0002ULL));

    SimReport report;
    std::map<FrameIndex, ChordToken> promised;
    std::map<FrameIndex, std::pair<Millis, FrameIndex>> sent;  // target -> (send time, commit frames)
    std::vector<Millis> round_trips;
    std::optional<WarmStart> warm;

    auto send = [&](const JamRequest& req, Millis now) {
        ++report.requests;
        sent[req.target_frame] = {now, req.settings.commit_frames()};
        push({now + request_leg.next(), EventType::server_arrival, 0, 0, 0, encode(req)});
    };
    auto maybe_send = [&](Millis now) {
        if (engine.request_ready(now)) send(engine.build_request(now), now);
    };
    auto observe = [&](const std::vector<EmittedEvent>& events) {
        for (const auto& ev : events) {
            if (ev.kind != EmittedEvent::Kind::chord_on) continue;
            ++report.chord_onsets;
            if (ev.frame < engine.settings().silence_frames()) ++report.silence_chord_onsets;
            report.chord_onset_errors_ms.push_back(std::abs(ev.due - grid.time_of_frame(ev.frame)));
        }
    };

    while (!queue.empty() && queue.top().time <= end_time) {
        SimEvent ev = queue.top();
        queue.pop();
        const Millis now = ev.time;
        switch (ev.type) {
            case EventType::note_on:
            case EventType::note_off:
                engine.on_user_note(ev.pitch, ev.type == EventType::note_on, now);
                if (ev.type == EventType::note_on) maybe_send(now);
                break;
            case EventType::settings:
                engine.update_settings([&] {
                    SessionSettings s = config.changes[ev.change].settings;
                    s.seed = config.seed;
                    return s;
                }());
                break;
            case EventType::tick:
                observe(engine.play_due(now));
                maybe_send(now);
                break;
            case EventType::server_arrival: {
                server_clock.set(now);
                std::string reply;
                auto decoded = decode(ev.body);
                if (const auto* msg = std::get_if<WireMessage>(&decoded); msg && std::holds_alternative<JamRequest>(*msg)) {
                    const auto& req = std::get<JamRequest>(*msg);
                    if (warm && req.target_frame > warm->start_frame + static_cast<FrameIndex>(warm->chords.size())) {
                        ++report.warm_start_echoes;
                        const auto begin = static_cast<std::size_t>(warm->start_frame);
                        if (!std::equal(warm->chords.begin(), warm->chords.end(), req.chords.begin() + begin)) {
                            ++report.warm_start_echo_mismatches;
                        }
                    }
                    HandlerTrace trace;
                    HandlerResult result = handle_request(req, agents, server_clock, &trace);
                    report.max_context_tokens = std::max(report.max_context_tokens, trace.max_context_tokens);
                    if (const auto* resp = std::get_if<JamResponse>(&result)) {
                        for (std::size_t i = 0; i < req.committed.size(); ++i) {
                            if (i >= resp->chords.size() || resp->chords[i] != req.committed[i].token) {
                                ++report.commit_violations;
                            }
                        }
                        reply = encode(*resp);
                    } else {
                        reply = encode(std::get<WireError>(result));
                    }
                } else {
                    reply = encode(WireError{WireError::Code::malformed, "expected a request"});
                }
                push({now + response_leg.next(), EventType::client_arrival, 0, 0, 0, std::move(reply)});
                break;
            }
            case EventType::client_arrival: {
                auto decoded = decode(ev.body);
                const auto* msg = std::get_if<WireMessage>(&decoded);
                const auto* resp = msg ? std::get_if<JamResponse>(msg) : nullptr;
                if (resp == nullptr) {
                    ++report.wire_errors;
                    engine.abandon_request(now);
                    maybe_send(now);
                    break;
                }
                if (auto it = sent.find(resp->target_frame); it != sent.end()) {
                    round_trips.push_back(now - it->second.first);
                    const FrameIndex current = engine.clock()->frame_at(now);
                    const FrameIndex commit = it->second.second;
                    for (FrameIndex i = 0; i < commit && i < static_cast<FrameIndex>(resp->chords.size()); ++i) {
                        const FrameIndex f = resp->target_frame + i;
                        if (f > current) promised.emplace(f, resp->chords[static_cast<std::size_t>(i)]);
                    }
                }
                if (resp->warm_start) {
                    report.warm_start_targets.push_back(resp->target_frame);
                    warm = resp->warm_start;
                }
                if (auto next = engine.apply_response(*resp, now)) send(*next, now);
                break;
            }
        }
    }
    engine.stop(end_time);
    observe(engine.play_due(end_time));

    report.record = engine.export_session();
    report.chords_played = report.record.chords;
    report.frames_simulated = static_cast<FrameIndex>(report.record.frames());
    report.underruns = engine.underruns();
    report.plan_changes = engine.plan_changes();
    report.plan_churn = static_cast<double>(report.plan_changes) / static_cast<double>(report.frames_simulated);
    for (const auto& [f, token] : promised) {
        if (f < report.frames_simulated && report.chords_played[static_cast<std::size_t>(f)] != token) {
            ++report.commit_violations;
        }
    }
    report.response_ms = LatencySummary{percentile(round_trips, 0.50), percentile(round_trips, 0.95),
                                        round_trips.empty() ? 0.0 : *std::max_element(round_trips.begin(), round_trips.end())};
    return report;
}

bool SimDiff::all_zero() const {
    return underruns == 0 && commit_violations == 0 && plan_churn == 0.0 && response_p50 == 0.0 &&
           response_p95 == 0.0 && response_max == 0.0 && chord_frames_differing == 0;
}

SimDiff compare_runs(const SimReport& a, const SimReport& b) {
    if (a.frames_simulated != b.frames_simulated) {
        throw std::invalid_argument("cannot compare runs with different horizons");
    }
    SimDiff d;
    d.underruns = static_cast<long long>(b.underruns) - static_cast<long long>(a.underruns);
    d.commit_violations = static_cast<long long>(b.commit_violations) - static_cast<long long>(a.commit_violations);
    d.plan_churn = b.plan_churn - a.plan_churn;
    d.response_p50 = b.response_ms.p50 - a.response_ms.p50;
    d.response_p95 = b.response_ms.p95 - a.response_ms.p95;
    d.response_max = b.response_ms.max - a.response_ms.max;
    for (std::size_t f = 0; f < a.chords_played.size() && f < b.chords_played.size(); ++f) {
        if (a.chords_played[f] != b.chords_played[f]) ++d.chord_frames_differing;
    }
    return d;
}

std::string report_to_json(const SimReport& report) {
    nlohmann::ordered_json j;
    j["frames_simulated"] = report.frames_simulated;
    j["underruns"] = report.underruns;
    j["commit_violations"] = report.commit_violations;
    j["plan_churn"] = report.plan_churn;
    j["plan_changes"] = report.plan_changes;
    j["response_ms"] = {{"p50", report.response_ms.p50}, {"p95", report.response_ms.p95}, {"max", report.response_ms.max}};
    j["requests"] = report.requests;
    j["wire_errors"] = report.wire_errors;
    j["warm_start_targets"] = report.warm_start_targets;
    j["warm_start_echoes"] = report.warm_start_echoes;
    j["warm_start_echo_mismatches"] = report.warm_start_echo_mismatches;
    j["max_context_tokens"] = report.max_context_tokens;
    j["chord_onsets"] = report.chord_onsets;
    j["silence_chord_onsets"] = report.silence_chord_onsets;
    j["underrun_frames"] = report.record.underruns;
    j["chords_played"] = encode_chords(report.chords_played);
    return j.dump(2) + "\n";
}

std::string diff_to_json(const SimDiff& diff) {
    nlohmann::ordered_json j;
    j["underruns"] = diff.underruns;
    j["commit_violations"] = diff.commit_violations;
    j["plan_churn"] = diff.plan_churn;
    j["response_ms"] = {{"p50", diff.response_p50}, {"p95", diff.response_p95}, {"max", diff.response_max}};
    j["chord_frames_differing"] = diff.chord_frames_differing;
    return j.dump(2) + "\n";
}

}  // namespace jam
