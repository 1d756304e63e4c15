#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tacpalm/grid.hpp"

namespace tacpalm::ingest {

// ---------------------------------------------------------------------------
// multipart/x-mixed-replace stream parsing (transport independent)
// ---------------------------------------------------------------------------

// Extracts the boundary token from a Content-Type header value; throws
// FormatError when the type is not multipart/x-mixed-replace or the boundary
// parameter is missing.
std::string boundary_of_content_type(const std::string& content_type);

// Incremental parser for a multipart stream. Parts with a Content-Length
// header are cut at exactly that many bytes (a boundary byte sequence inside
// the payload does not split the part); otherwise the payload ends at the
// next boundary marker.
class MultipartParser {
public:
    using PartSink = std::function<void(const std::map<std::string, std::string>& headers,
                                        std::vector<std::uint8_t>&& payload)>;

    explicit MultipartParser(std::string boundary);

    void feed(const std::uint8_t* data, std::size_t size, const PartSink& sink);
    void feed(const std::string& data, const PartSink& sink);

private:
    enum class State { Preamble, Headers, BodyLength, BodyScan };

    std::string delimiter_;  // "--" + boundary
    std::vector<std::uint8_t> buffer_;
    State state_ = State::Preamble;
    std::map<std::string, std::string> headers_;  // lowercase keys
    std::size_t content_length_ = 0;

    bool step(const PartSink& sink);
};

// Baseline JPEG -> RGB intensities in [0, 1]. Truncated or corrupt data
// throws FormatError (decoder warnings count as corruption).
TactileFrame decode_jpeg(const std::vector<std::uint8_t>& bytes);

// ---------------------------------------------------------------------------
// Frame sources
// ---------------------------------------------------------------------------

struct Frame {
    double timestamp = 0.0;           // seconds, strictly monotone per source
    TactileFrame image;
    std::vector<std::uint8_t> jpeg;   // raw payload (HTTP sources only)
};

struct RetryPolicy {
    int base_delay_ms = 100;
    double factor = 2.0;
    int max_tries = 5;
};

struct HttpSourceSpec {
    std::string url;                  // http://host[:port]/path
    double timeout_s = 5.0;
    RetryPolicy retry;
    std::size_t queue_depth = 4;      // oldest frames drop when the consumer lags
};

struct DirectorySourceSpec {
    std::filesystem::path path;
    std::string glob = "*.png";       // '*' and '?' wildcards
    double fps = 30.0;                // synthesizes timestamps index/fps
};

// One producer (the network reader) feeding one consumer through a bounded
// queue. Handles are not shareable across threads; close is idempotent.
class FrameSource {
public:
    static FrameSource open(const HttpSourceSpec& spec);
    static FrameSource open(const DirectorySourceSpec& spec);

    FrameSource(FrameSource&&) noexcept;
    FrameSource& operator=(FrameSource&&) noexcept;
    ~FrameSource();

    // Blocks for the next frame; std::nullopt signals end of stream.
    std::optional<Frame> next_frame();

    void close();

    std::size_t decode_drops() const;   // truncated/corrupt payloads skipped
    std::size_t queue_drops() const;    // frames evicted by a lagging consumer
    // Set when the stream died (e.g. reconnect budget exhausted).
    std::optional<std::string> error() const;

private:
    FrameSource();
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct RecordManifest {
    std::vector<std::pair<std::string, double>> frames;  // (file name, timestamp)
    std::size_t delivered = 0;
    std::size_t decode_drops = 0;
    std::size_t queue_drops = 0;
};

// Pulls up to max_frames frames, writes them as PNGs plus a manifest.json
// into out_dir.
RecordManifest record(FrameSource& source, const std::filesystem::path& out_dir,
                      std::size_t max_frames);

}  // namespace tacpalm::ingest
