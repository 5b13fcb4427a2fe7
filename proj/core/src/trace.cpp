#include "fsj/trace.hpp"

#include <json.hpp>

#include "fsj/syntax.hpp"

namespace fsj {

std::string format_text(const TraceEvent& ev) {
    std::string out;
    switch (ev.kind) {
        case TraceKind::Step:
            return "step=" + std::to_string(ev.step) + " rule=" + std::string(to_string(ev.rule)) +
                   " expr=" + render(ev.expr);
        case TraceKind::Alloc:
            return "  alloc loc=" + to_string(ev.loc) + " class=" + ev.cls;
        case TraceKind::SignalWrite:
        case TraceKind::PlainWrite:
            return "  " + std::string(to_string(ev.kind)) + " key=" + to_string(ev.key) +
                   " old=" + to_string(ev.old_value) + " new=" + to_string(ev.new_value);
        case TraceKind::HandlerEnqueue:
        case TraceKind::SubscribeRegistered:
            return "  " + std::string(to_string(ev.kind)) + " key=" + to_string(ev.key) +
                   " handlers=" + std::to_string(ev.handler_count);
    }
    return out;
}

std::string structured_header() {
    nlohmann::json h;
    h["format"] = "fsj-trace";
    h["version"] = kStructuredTraceVersion;
    return h.dump();
}

std::string format_structured(const TraceEvent& ev) {
    nlohmann::json j;
    j["step"] = ev.step;
    j["event"] = std::string(to_string(ev.kind));
    switch (ev.kind) {
        case TraceKind::Step:
            j["rule"] = std::string(to_string(ev.rule));
            j["expr"] = render(ev.expr);
            break;
        case TraceKind::Alloc:
            j["loc"] = ev.loc.id;
            j["class"] = ev.cls;
            break;
        case TraceKind::SignalWrite:
        case TraceKind::PlainWrite:
            j["loc"] = ev.key.loc.id;
            j["field"] = ev.key.field;
            j["old"] = ev.old_value.id;
            j["new"] = ev.new_value.id;
            break;
        case TraceKind::HandlerEnqueue:
        case TraceKind::SubscribeRegistered:
            j["loc"] = ev.key.loc.id;
            j["field"] = ev.key.field;
            j["handlers"] = ev.handler_count;
            break;
    }
    return j.dump();
}

TraceWriter::TraceWriter(std::ostream& os, TraceFormat format) : os_(os), format_(format) {
    if (format_ == TraceFormat::Structured) os_ << structured_header() << '\n';
}

void TraceWriter::write(const TraceEvent& ev) {
    os_ << (format_ == TraceFormat::Text ? format_text(ev) : format_structured(ev)) << '\n';
}

void TraceWriter::write_all(const std::vector<TraceEvent>& events) {
    for (const auto& ev : events) write(ev);
}

}  // namespace fsj
