#include "jam/record.hpp"

#include "jam/kv.hpp"

namespace jam {

std::string serialize_record(const SessionRecord& record) {
    KvDocument doc;
    doc.set("type", std::string("session"));
    doc.set("session_id", record.session_id);
    doc.set("session_start", record.session_start);
    doc.set("frames", static_cast<std::int64_t>(record.frames()));
    doc.set("settings_count", static_cast<std::int64_t>(record.settings.size()));
    for (std::size_t i = 0; i < record.settings.size(); ++i) {
        const std::string prefix = "settings." + std::to_string(i) + ".";
        doc.set(prefix + "from_frame", std::int64_t{record.settings[i].from_frame});
        doc.set(prefix + "to_frame", std::int64_t{record.settings[i].to_frame});
        write_settings(doc, record.settings[i].settings, prefix);
    }
    doc.set("melody", encode_melody(record.melody));
    doc.set("chords", encode_chords(record.chords));
    if (record.warm_start) {
        doc.set("warm_start_frame", std::int64_t{record.warm_start->start_frame});
        doc.set("warm_start_chords", encode_chords(record.warm_start->chords));
    }
    std::vector<std::string> requests;
    for (const auto& r : record.requests) {
        requests.push_back(std::to_string(r.target_frame) + "@" + format_double(r.send_ms) + "@" +
                           (r.recv_ms ? format_double(*r.recv_ms) : std::string("-")) + "@" +
                           format_double(r.gen_ms));
    }
    doc.set("requests", join_fields(requests));
    std::vector<std::string> underruns;
    for (FrameIndex f : record.underruns) underruns.push_back(std::to_string(f));
    doc.set("underruns", join_fields(underruns));
    return doc.serialize();
}

SessionRecord parse_record(std::string_view text) {
    const KvDocument doc = KvDocument::parse(text);
    if (doc.at("type") != "session") throw KvError("not a session record");
    SessionRecord record;
    record.session_id = doc.at("session_id");
    record.session_start = parse_double(doc.at("session_start"));
    const auto count = parse_int(doc.at("settings_count"));
    if (count < 0) throw KvError("negative settings_count");
    for (std::int64_t i = 0; i < count; ++i) {
        const std::string prefix = "settings." + std::to_string(i) + ".";
        SettingsSpan span;
        span.from_frame = parse_int(doc.at(prefix + "from_frame"));
        span.to_frame = parse_int(doc.at(prefix + "to_frame"));
        read_settings(doc, span.settings, prefix);
        record.settings.push_back(std::move(span));
    }
    record.melody = decode_melody(doc.at("melody"));
    record.chords = decode_chords(doc.at("chords"));
    const auto frames = parse_int(doc.at("frames"));
    if (frames != static_cast<std::int64_t>(record.melody.size()) || record.melody.size() != record.chords.size()) {
        throw KvError("session grids disagree with the frame count");
    }
    if (doc.contains("warm_start_frame")) {
        record.warm_start = WarmStart{parse_int(doc.at("warm_start_frame")),
                                      decode_chords(doc.at("warm_start_chords"))};
    }
    for (auto field : split_fields(doc.at("requests"))) {
        const auto parts = split_fields(field, '@');
        if (parts.size() != 4) throw KvError("malformed request log entry");
        RequestLogEntry entry;
        entry.target_frame = parse_int(parts[0]);
        entry.send_ms = parse_double(parts[1]);
        if (parts[2] != "-") entry.recv_ms = parse_double(parts[2]);
        entry.gen_ms = parse_double(parts[3]);
        record.requests.push_back(entry);
    }
    for (auto field : split_fields(doc.at("underruns"))) record.underruns.push_back(parse_int(field));
    return record;
}

}  // namespace jam
