#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "fsj/eval.hpp"

namespace fsj {

enum class TraceFormat { Text, Structured };

inline constexpr int kStructuredTraceVersion = 1;

/// Streams trace events. Text lines look like
/// `step=3 rule=R-NEW expr=@0.f`, followed by indented event lines.
/// The structured form is JSON lines behind a versioned header record.
class TraceWriter {
public:
    TraceWriter(std::ostream& os, TraceFormat format);

    void write(const TraceEvent& ev);
    void write_all(const std::vector<TraceEvent>& events);

private:
    std::ostream& os_;
    TraceFormat format_;
};

std::string format_text(const TraceEvent& ev);
std::string format_structured(const TraceEvent& ev);
std::string structured_header();

}  // namespace fsj
