// Headless session runner: scripted melody against the in-process server
// under a virtual-time latency model.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "jam/agents.hpp"
#include "jam/record.hpp"
#include "jam/sim.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

jam::ScriptedMelody load_script(const std::string& source) {
    if (auto fixture = jam::fixture_by_name(source)) return *fixture;
    return jam::parse_script(read_file(source));
}

struct Options {
    std::string script = "arpeggio";
    int repeat = 0;
    jam::SessionSettings settings;
    std::string latency = "fixed:0ms";
    std::uint64_t seed = 0;
    long long frames = 0;
    std::string out;
    std::string report;
};

void add_session_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--bpm", o.settings.bpm, "Tempo")->capture_default_str();
    cmd->add_option("--beats-per-measure", o.settings.beats_per_measure, "Metronome accent period")->capture_default_str();
    cmd->add_option("--lookahead", o.settings.lookahead_beats, "Lookahead in beats")->capture_default_str();
    cmd->add_option("--commit", o.settings.commit_beats, "Commit period in beats")->capture_default_str();
    cmd->add_option("--silence", o.settings.silence_beats, "Silence period in beats")->capture_default_str();
    cmd->add_option("--model", o.settings.model_id, "Agent id")->capture_default_str();
    cmd->add_option("--temperature", o.settings.temperature, "Sampling temperature")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Seed for the agent and the latency draws")->capture_default_str();
    cmd->add_option("--latency", o.latency,
                    "Per-leg delay: fixed:D, uniform:LO:HI or spike:BASE:SPIKE:N; D in ms, frames or beats")
        ->capture_default_str();
    cmd->add_option("--out", o.out, "Write the session record (.jam)");
    cmd->add_option("--report", o.report, "Write the JSON report");
}

int finish(const Options& o, const jam::SimReport& report, bool strict) {
    const std::string json = jam::report_to_json(report);
    if (!o.report.empty()) {
        write_file(o.report, json);
    } else {
        std::cout << json;
    }
    if (!o.out.empty()) write_file(o.out, jam::serialize_record(report.record));
    std::cerr << "frames=" << report.frames_simulated << " underruns=" << report.underruns
              << " commit_violations=" << report.commit_violations << " plan_churn=" << report.plan_churn
              << " rtt_p95_ms=" << report.response_ms.p95 << "\n";
    if (report.commit_violations > 0) return 2;
    if (strict && report.underruns > 0) return 3;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Virtual-time jam session simulator"};
    app.require_subcommand(1);
    Options run_opts, ref_opts, replay_opts;
    std::string record_path;

    auto* run = app.add_subcommand("run", "Simulate a scripted session");
    add_session_flags(run, run_opts);
    run->add_option("--script", run_opts.script, "Script file or fixture (arpeggio, chromatic, sparse)")
        ->capture_default_str();
    run->add_option("--repeat", run_opts.repeat, "Repeat the script this many times (0 = fill the horizon)");
    run->add_option("--frames", run_opts.frames, "Horizon in frames (default: silence + 64 beats)");

    auto* ref = app.add_subcommand("reference", "120 BPM, lookahead 4, commit 2, 2-beat round trip");
    ref_opts.settings.lookahead_beats = 4;
    ref_opts.settings.commit_beats = 2;
    ref_opts.latency = "fixed:1beat";
    add_session_flags(ref, ref_opts);
    ref->add_option("--script", ref_opts.script, "Script file or fixture")->capture_default_str();

    auto* replay = app.add_subcommand("replay", "Re-run the melody of a recorded session");
    replay->add_option("record", record_path, "Session record (.jam)")->required();
    replay->add_option("--latency", replay_opts.latency, "Per-leg delay")->capture_default_str();
    replay->add_option("--seed", replay_opts.seed, "Seed")->capture_default_str();
    replay->add_option("--out", replay_opts.out, "Write the new session record");
    replay->add_option("--report", replay_opts.report, "Write the JSON report");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto agents = jam::AgentRegistry::with_defaults();
        auto build = [&](const Options& o, const jam::ScriptedMelody& script) {
            jam::SimConfig config;
            config.settings = o.settings;
            config.settings.seed = o.seed;
            config.latency = jam::parse_latency(o.latency, o.settings.bpm);
            config.seed = o.seed;
            config.frames = o.frames > 0 ? o.frames
                                         : (o.settings.silence_beats + 64) * jam::FrameIndex{jam::kFramesPerBeat};
            const jam::FrameIndex span = std::max<jam::FrameIndex>(script.end_frame(), jam::kFramesPerBeat);
            const int times = o.repeat > 0 ? o.repeat : static_cast<int>((config.frames + span - 1) / span);
            config.script = script.repeated(times, span);
            std::erase_if(config.script.notes, [&](const jam::ScriptNote& n) { return n.frame >= config.frames; });
            return config;
        };

        if (*run) {
            return finish(run_opts, jam::run_sim(build(run_opts, load_script(run_opts.script)), agents), false);
        }
        if (*ref) {
            return finish(ref_opts, jam::run_sim(build(ref_opts, load_script(ref_opts.script)), agents), true);
        }
        const auto record = jam::parse_record(read_file(record_path));
        if (record.settings.empty() || record.frames() == 0) throw std::runtime_error("record has no session");
        jam::SimConfig config;
        config.settings = record.settings.front().settings;
        for (std::size_t i = 1; i < record.settings.size(); ++i) {
            config.changes.push_back({record.settings[i].from_frame, record.settings[i].settings});
        }
        config.script = jam::script_from_record(record);
        config.latency = jam::parse_latency(replay_opts.latency, config.settings.bpm);
        config.seed = replay_opts.seed;
        config.frames = static_cast<jam::FrameIndex>(record.frames());
        const auto report = jam::run_sim(config, agents);
        const auto diff = jam::compare_runs(
            jam::SimReport{.chords_played = record.chords, .frames_simulated = config.frames}, report);
        std::cerr << "chord frames differing from the record: " << diff.chord_frames_differing << "\n";
        return finish(replay_opts, report, false);
    } catch (const std::exception& e) {
        std::cerr << "jamsim: " << e.what() << "\n";
        return 1;
    }
}
