#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "jam/clock.hpp"
#include "jam/kv.hpp"
#include "jam/settings.hpp"
#include "jam/tokens.hpp"

namespace jam {

/// Chord copied from the previous response for a frame inside the commit period.
struct CommittedChord {
    FrameIndex frame = 0;
    ChordToken token = ChordToken::no_chord();
    bool operator==(const CommittedChord&) const = default;
};

/// Client -> server. Carries the whole session so the server keeps no state.
struct JamRequest {
    std::string session_id;
    FrameIndex target_frame = 0;
    SessionSettings settings;
    /// False when the wire message omitted `seed`; the service then applies
    /// its configured default.
    bool seed_present = true;
    std::vector<MelodyToken> melody;   // frames [0, target_frame)
    std::vector<ChordToken> chords;    // frames [0, target_frame), as played
    std::vector<CommittedChord> committed;

    bool operator==(const JamRequest&) const = default;
};

/// Offline harmonization of the silence period: echoed into later
/// histories, never played.
struct WarmStart {
    FrameIndex start_frame = 0;
    std::vector<ChordToken> chords;
    bool operator==(const WarmStart&) const = default;
};

/// Server -> client plan for frames [target_frame, target_frame + lookahead).
struct JamResponse {
    std::string session_id;
    FrameIndex target_frame = 0;
    std::vector<ChordToken> chords;
    std::vector<std::vector<int>> voicings;  // empty for HOLD / NO_CHORD
    std::optional<WarmStart> warm_start;
    Millis gen_ms = 0.0;

    bool operator==(const JamResponse&) const = default;
};

struct WireError {
    enum class Code { malformed, bad_settings, unknown_model, inconsistent_history };
    Code code = Code::malformed;
    std::string detail;

    bool operator==(const WireError&) const = default;
};

std::string_view code_name(WireError::Code code);
std::optional<WireError::Code> parse_code(std::string_view name);

using WireMessage = std::variant<JamRequest, JamResponse, WireError>;

KvDocument to_document(const JamRequest& req);
KvDocument to_document(const JamResponse& resp);
KvDocument to_document(const WireError& err);

/// Message body (without length prefix).
std::string encode(const WireMessage& msg);

/// Parses a message body. Grammar and structure problems come back as a
/// MALFORMED WireError rather than an exception.
std::variant<WireMessage, WireError> decode(std::string_view body);

// Token array codecs, exposed for the session file format. Throw KvError.
std::string encode_melody(const std::vector<MelodyToken>& tokens);
std::string encode_chords(const std::vector<ChordToken>& tokens);
std::vector<MelodyToken> decode_melody(std::string_view s);
std::vector<ChordToken> decode_chords(std::string_view s);

/// Settings keys, in wire order.
void write_settings(KvDocument& doc, const SessionSettings& s, std::string_view prefix = {});
/// Returns false if `seed` was absent (other keys are required).
bool read_settings(const KvDocument& doc, SessionSettings& s, std::string_view prefix = {});

}  // namespace jam
