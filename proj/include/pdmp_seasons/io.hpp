#pragma once

// Plot-ready exports: trajectory CSV, event JSONL, and atomic file writes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "flow.hpp"
#include "model.hpp"
#include "simulator.hpp"

namespace pdmp_seasons {

inline std::string csv_header(ModelKind kind)
{
    return kind == ModelKind::herbivore4d ? "t,w,g,h_G,h_B,zeta,i" : "t,w,g,zeta,i";
}

inline void write_csv_row(std::ostream& out, ModelKind kind, double t, const StateVector& xi,
                          double zeta, int season)
{
    out << format_double(t) << ',' << format_double(xi[kW]) << ',' << format_double(xi[kG]);
    if (kind == ModelKind::herbivore4d)
        out << ',' << format_double(xi[kHG]) << ',' << format_double(xi[kHB]);
    out << ',' << format_double(zeta) << ',' << season << '\n';
}

/// Streams dense samples straight to CSV.
struct CsvSink {
    std::ostream* out;
    ModelKind kind;

    void on_segment(const DenseSegment& seg)
    {
        for (const auto& s : seg.samples)
            write_csv_row(*out, kind, s.t, s.xi, seg.zeta_at(s.t), seg.season);
    }
};

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    out << csv_header(traj.kind) << '\n';
    for (const auto& s : traj.samples)
        write_csv_row(out, traj.kind, s.t, s.xi, s.zeta, s.season);
}

namespace detail {

inline void write_state_object(std::ostream& out, ModelKind kind, const HybridState& x)
{
    out << "{\"w\":" << format_double(x.xi[kW]) << ",\"g\":" << format_double(x.xi[kG]);
    if (kind == ModelKind::herbivore4d)
        out << ",\"h_G\":" << format_double(x.xi[kHG]) << ",\"h_B\":" << format_double(x.xi[kHB]);
    out << ",\"zeta\":" << format_double(x.zeta) << ",\"i\":" << x.season << '}';
}

} // namespace detail

/// One JSON object per line:
/// {t, kind, theta_w?, theta_g?, before: {...}, after: {...}}
inline void write_event_jsonl(std::ostream& out, ModelKind kind, const Event& e)
{
    out << "{\"t\":" << format_double(e.time) << ",\"kind\":\"" << to_string(e.kind) << '"';
    if (e.kind == EventKind::fire)
        out << ",\"theta_w\":" << format_double(e.theta.w) << ",\"theta_g\":"
            << format_double(e.theta.g);
    out << ",\"before\":";
    detail::write_state_object(out, kind, e.before);
    out << ",\"after\":";
    detail::write_state_object(out, kind, e.after);
    out << "}\n";
}

inline void write_events_jsonl(std::ostream& out, ModelKind kind, const std::vector<Event>& events)
{
    for (const auto& e : events)
        write_event_jsonl(out, kind, e);
}

/// Writes through a temporary sibling file renamed into place on commit().
class AtomicFile {
public:
    explicit AtomicFile(std::filesystem::path target)
        : target_(std::move(target)), temp_(target_.string() + ".tmp")
    {
        out_.open(temp_, std::ios::binary | std::ios::trunc);
        if (!out_)
            throw Error("cannot write " + temp_.string());
    }

    AtomicFile(const AtomicFile&) = delete;
    AtomicFile& operator=(const AtomicFile&) = delete;

    ~AtomicFile()
    {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(temp_, ec);
        }
    }

    std::ostream& stream() { return out_; }

    void commit()
    {
        out_.flush();
        if (!out_)
            throw Error("write failed for " + temp_.string());
        out_.close();
        std::filesystem::rename(temp_, target_);
        committed_ = true;
    }

private:
    std::filesystem::path target_;
    std::filesystem::path temp_;
    std::ofstream out_;
    bool committed_ = false;
};

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    AtomicFile f(path);
    f.stream() << content;
    f.commit();
}

} // namespace pdmp_seasons
