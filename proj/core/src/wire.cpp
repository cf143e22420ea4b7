#include "jam/wire.hpp"

#include <algorithm>

namespace jam {
namespace {

std::string key(std::string_view prefix, std::string_view name) {
    std::string k(prefix);
    k += name;
    return k;
}

std::string encode_voicing(const std::vector<int>& pitches) {
    if (pitches.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < pitches.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(pitches[i]);
    }
    return out;
}

std::vector<int> decode_voicing(std::string_view s) {
    std::vector<int> out;
    if (s == "-") return out;
    for (auto field : split_fields(s, ',')) {
        const auto p = parse_int(field);
        if (p < 0 || p > 127) throw KvError("voicing pitch out of range");
        out.push_back(static_cast<int>(p));
    }
    if (out.empty()) throw KvError("empty voicing must be written as '-'");
    return out;
}

JamRequest read_request(const KvDocument& doc) {
    JamRequest req;
    req.session_id = doc.at("session_id");
    req.target_frame = parse_int(doc.at("target_frame"));
    req.seed_present = read_settings(doc, req.settings);
    req.melody = decode_melody(doc.at("melody"));
    req.chords = decode_chords(doc.at("chords"));
    for (auto field : split_fields(doc.at("committed"))) {
        const auto at = field.find('@');
        if (at == std::string_view::npos) throw KvError("committed entry lacks '@'");
        auto token = parse_chord_token(field.substr(at + 1));
        if (!token) throw KvError("bad committed chord token: '" + std::string(field) + "'");
        req.committed.push_back({parse_int(field.substr(0, at)), *token});
    }
    return req;
}

JamResponse read_response(const KvDocument& doc) {
    JamResponse resp;
    resp.session_id = doc.at("session_id");
    resp.target_frame = parse_int(doc.at("target_frame"));
    resp.chords = decode_chords(doc.at("chords"));
    for (auto field : split_fields(doc.at("voicings"))) resp.voicings.push_back(decode_voicing(field));
    if (resp.voicings.size() != resp.chords.size()) throw KvError("voicings and chords differ in length");
    if (doc.contains("warm_start_frame")) {
        WarmStart ws;
        ws.start_frame = parse_int(doc.at("warm_start_frame"));
        ws.chords = decode_chords(doc.at("warm_start_chords"));
        resp.warm_start = std::move(ws);
    }
    resp.gen_ms = parse_double(doc.at("gen_ms"));
    return resp;
}

WireError read_error(const KvDocument& doc) {
    auto code = parse_code(doc.at("code"));
    if (!code) throw KvError("unknown error code");
    return WireError{*code, doc.at("detail")};
}

std::string sanitize(std::string_view s) {
    std::string out(s);
    std::replace(out.begin(), out.end(), '\n', ' ');
    std::replace(out.begin(), out.end(), '\r', ' ');
    return out;
}

}  // namespace

std::string_view code_name(WireError::Code code) {
    switch (code) {
        case WireError::Code::malformed: return "MALFORMED";
        case WireError::Code::bad_settings: return "BAD_SETTINGS";
        case WireError::Code::unknown_model: return "UNKNOWN_MODEL";
        case WireError::Code::inconsistent_history: return "INCONSISTENT_HISTORY";
    }
    return "MALFORMED";
}

std::optional<WireError::Code> parse_code(std::string_view name) {
    for (auto c : {WireError::Code::malformed, WireError::Code::bad_settings,
                   WireError::Code::unknown_model, WireError::Code::inconsistent_history}) {
        if (code_name(c) == name) return c;
    }
    return std::nullopt;
}

std::string encode_melody(const std::vector<MelodyToken>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += to_string(tokens[i]);
    }
    return out;
}

std::string encode_chords(const std::vector<ChordToken>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += to_string(tokens[i]);
    }
    return out;
}

std::vector<MelodyToken> decode_melody(std::string_view s) {
    std::vector<MelodyToken> out;
    for (auto field : split_fields(s)) {
        auto t = parse_melody_token(field);
        if (!t) throw KvError("bad melody token: '" + std::string(field) + "'");
        out.push_back(*t);
    }
    return out;
}

std::vector<ChordToken> decode_chords(std::string_view s) {
    std::vector<ChordToken> out;
    for (auto field : split_fields(s)) {
        auto t = parse_chord_token(field);
        if (!t) throw KvError("bad chord token: '" + std::string(field) + "'");
        out.push_back(*t);
    }
    return out;
}

void write_settings(KvDocument& doc, const SessionSettings& s, std::string_view prefix) {
    doc.set(key(prefix, "bpm"), s.bpm);
    doc.set(key(prefix, "beats_per_measure"), std::int64_t{s.beats_per_measure});
    doc.set(key(prefix, "silence_beats"), std::int64_t{s.silence_beats});
    doc.set(key(prefix, "lookahead_beats"), std::int64_t{s.lookahead_beats});
    doc.set(key(prefix, "commit_beats"), std::int64_t{s.commit_beats});
    doc.set(key(prefix, "temperature"), s.temperature);
    doc.set(key(prefix, "model_id"), s.model_id);
    doc.set(key(prefix, "metronome_on"), s.metronome_on);
    doc.set(key(prefix, "show_incoming_chords"), s.show_incoming_chords);
    doc.set(key(prefix, "seed"), s.seed);
}

bool read_settings(const KvDocument& doc, SessionSettings& s, std::string_view prefix) {
    auto as_int = [&](std::string_view name) {
        const auto v = parse_int(doc.at(key(prefix, name)));
        if (v < INT32_MIN || v > INT32_MAX) throw KvError("integer setting out of range");
        return static_cast<int>(v);
    };
    s.bpm = parse_double(doc.at(key(prefix, "bpm")));
    s.beats_per_measure = as_int("beats_per_measure");
    s.silence_beats = as_int("silence_beats");
    s.lookahead_beats = as_int("lookahead_beats");
    s.commit_beats = as_int("commit_beats");
    s.temperature = parse_double(doc.at(key(prefix, "temperature")));
    s.model_id = doc.at(key(prefix, "model_id"));
    s.metronome_on = parse_bool(doc.at(key(prefix, "metronome_on")));
    s.show_incoming_chords = parse_bool(doc.at(key(prefix, "show_incoming_chords")));
    if (const auto* seed = doc.find(key(prefix, "seed"))) {
        s.seed = parse_uint(*seed);
        return true;
    }
    return false;
}

KvDocument to_document(const JamRequest& req) {
    KvDocument doc;
    doc.set("type", std::string("request"));
    doc.set("session_id", req.session_id);
    doc.set("target_frame", std::int64_t{req.target_frame});
    write_settings(doc, req.settings);
    if (!req.seed_present) {
        KvDocument trimmed;
        for (const auto& [k, v] : doc.entries()) {
            if (k != "seed") trimmed.set(k, v);
        }
        doc = std::move(trimmed);
    }
    doc.set("melody", encode_melody(req.melody));
    doc.set("chords", encode_chords(req.chords));
    std::vector<std::string> committed;
    for (const auto& c : req.committed) committed.push_back(std::to_string(c.frame) + "@" + to_string(c.token));
    doc.set("committed", join_fields(committed));
    return doc;
}

KvDocument to_document(const JamResponse& resp) {
    KvDocument doc;
    doc.set("type", std::string("response"));
    doc.set("session_id", resp.session_id);
    doc.set("target_frame", std::int64_t{resp.target_frame});
    doc.set("chords", encode_chords(resp.chords));
    std::vector<std::string> voicings;
    for (const auto& v : resp.voicings) voicings.push_back(encode_voicing(v));
    doc.set("voicings", join_fields(voicings));
    if (resp.warm_start) {
        doc.set("warm_start_frame", std::int64_t{resp.warm_start->start_frame});
        doc.set("warm_start_chords", encode_chords(resp.warm_start->chords));
    }
    doc.set("gen_ms", resp.gen_ms);
    return doc;
}

KvDocument to_document(const WireError& err) {
    KvDocument doc;
    doc.set("type", std::string("error"));
    doc.set("code", std::string(code_name(err.code)));
    doc.set("detail", sanitize(err.detail));
    return doc;
}

std::string encode(const WireMessage& msg) {
    return std::visit([](const auto& m) { return to_document(m).serialize(); }, msg);
}

std::variant<WireMessage, WireError> decode(std::string_view body) {
    try {
        const KvDocument doc = KvDocument::parse(body);
        const std::string& type = doc.at("type");
        WireMessage msg;
        if (type == "request") {
            msg = read_request(doc);
        } else if (type == "response") {
            msg = read_response(doc);
        } else if (type == "error") {
            msg = read_error(doc);
        } else {
            throw KvError("unknown message type '" + type + "'");
        }
        // Reject keys the message type does not define.
        const KvDocument canonical = std::visit([](const auto& m) { return to_document(m); }, msg);
        for (const auto& [k, v] : doc.entries()) {
            if (!canonical.contains(k)) throw KvError("unexpected key '" + k + "'");
        }
        return msg;
    } catch (const std::exception& e) {
        return WireError{WireError::Code::malformed, e.what()};
    }
}

}  // namespace jam
