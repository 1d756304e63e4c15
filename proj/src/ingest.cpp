#include "tacpalm/ingest.hpp"

#include <jpeglib.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <csetjmp>
#include <deque>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tacpalm/errors.hpp"

namespace tacpalm::ingest {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    std::size_t b = s.find_last_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

}  // namespace

std::string boundary_of_content_type(const std::string& content_type) {
    const std::string ct = lower(trim(content_type));
    if (ct.rfind("multipart/x-mixed-replace", 0) != 0) {
        throw FormatError("stream content type is not multipart/x-mixed-replace: " +
                          content_type);
    }
    // Parameters after the media type, split on ';'.
    std::size_t pos = content_type.find(';');
    while (pos != std::string::npos) {
        std::size_t end = content_type.find(';', pos + 1);
        std::string param = trim(content_type.substr(pos + 1, end - pos - 1));
        const std::size_t eq = param.find('=');
        if (eq != std::string::npos && lower(trim(param.substr(0, eq))) == "boundary") {
            std::string value = trim(param.substr(eq + 1));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
                value = value.substr(1, value.size() - 2);
            }
            if (value.empty()) break;
            return value;
        }
        pos = end;
    }
    throw FormatError("multipart content type is missing the boundary parameter");
}

MultipartParser::MultipartParser(std::string boundary) : delimiter_("--" + std::move(boundary)) {
    if (delimiter_.size() <= 2) {
        throw FormatError("empty multipart boundary");
    }
}

void MultipartParser::feed(const std::string& data, const PartSink& sink) {
    feed(reinterpret_cast<const std::uint8_t*>(data.data()), data.size(), sink);
}

void MultipartParser::feed(const std::uint8_t* data, std::size_t size, const PartSink& sink) {
    buffer_.insert(buffer_.end(), data, data + size);
    while (step(sink)) {
    }
}

// Processes one parse transition; returns false when more bytes are needed.
bool MultipartParser::step(const PartSink& sink) {
    switch (state_) {
        case State::Preamble: {
            auto it = std::search(buffer_.begin(), buffer_.end(), delimiter_.begin(),
                                  delimiter_.end());
            if (it == buffer_.end()) {
                // Discard everything that cannot hold a delimiter prefix.
                if (buffer_.size() > delimiter_.size()) {
                    buffer_.erase(buffer_.begin(),
                                  buffer_.end() - static_cast<long>(delimiter_.size()));
                }
                return false;
            }
            std::size_t after = static_cast<std::size_t>(it - buffer_.begin()) +
                                delimiter_.size();
            // Skip the line terminator after the delimiter (or the final "--").
            if (buffer_.size() < after + 2) return false;
            after += (buffer_[after] == '\r' && buffer_[after + 1] == '\n') ? 2
                     : (buffer_[after] == '\n')                             ? 1
                                                                            : 0;
            buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<long>(after));
            headers_.clear();
            state_ = State::Headers;
            return true;
        }
        case State::Headers: {
            static const std::string terminator = "\r\n\r\n";
            auto it = std::search(buffer_.begin(), buffer_.end(), terminator.begin(),
                                  terminator.end());
            if (it == buffer_.end()) return false;
            const std::string block(buffer_.begin(), it);
            buffer_.erase(buffer_.begin(), it + 4);
            std::size_t start = 0;
            while (start < block.size()) {
                std::size_t eol = block.find("\r\n", start);
                if (eol == std::string::npos) eol = block.size();
                const std::string line = block.substr(start, eol - start);
                start = eol + 2;
                const std::size_t colon = line.find(':');
                if (colon == std::string::npos) continue;
                headers_[lower(trim(line.substr(0, colon)))] = trim(line.substr(colon + 1));
            }
            auto cl = headers_.find("content-length");
            if (cl != headers_.end()) {
                try {
                    content_length_ = std::stoull(cl->second);
                } catch (...) {
                    throw FormatError("bad Content-Length in multipart part: " + cl->second);
                }
                state_ = State::BodyLength;
            } else {
                state_ = State::BodyScan;
            }
            return true;
        }
        case State::BodyLength: {
            if (buffer_.size() < content_length_) return false;
            std::vector<std::uint8_t> payload(buffer_.begin(),
                                              buffer_.begin() +
                                                  static_cast<long>(content_length_));
            buffer_.erase(buffer_.begin(),
                          buffer_.begin() + static_cast<long>(content_length_));
            state_ = State::Preamble;
            sink(headers_, std::move(payload));
            return true;
        }
        case State::BodyScan: {
            static const std::string crlf = "\r\n";
            const std::string marker = crlf + delimiter_;
            auto it = std::search(buffer_.begin(), buffer_.end(), marker.begin(), marker.end());
            if (it == buffer_.end()) return false;
            std::vector<std::uint8_t> payload(buffer_.begin(), it);
            buffer_.erase(buffer_.begin(), it + 2);  // keep the delimiter for Preamble
            state_ = State::Preamble;
            sink(headers_, std::move(payload));
            return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// JPEG decoding
// ---------------------------------------------------------------------------

namespace {

struct JpegErrorContext {
    jpeg_error_mgr mgr;
    std::jmp_buf env;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* ctx = reinterpret_cast<JpegErrorContext*>(cinfo->err);
    std::longjmp(ctx->env, 1);
}

}  // namespace

TactileFrame decode_jpeg(const std::vector<std::uint8_t>& bytes) {
    jpeg_decompress_struct cinfo{};
    JpegErrorContext err{};
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;

    TactileFrame frame;
    std::vector<unsigned char> row;
    if (setjmp(err.env)) {
        jpeg_destroy_decompress(&cinfo);
        throw FormatError("JPEG decode failed");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    if (jpeg_read_header(&cinfo, TRUE) != JPEG_HEADER_OK) {
        jpeg_destroy_decompress(&cinfo);
        throw FormatError("not a JPEG payload");
    }
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    frame = TactileFrame::zeros(static_cast<int>(cinfo.output_width),
                                static_cast<int>(cinfo.output_height), 3);
    row.resize(static_cast<std::size_t>(cinfo.output_width) * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        unsigned char* rows[1] = {row.data()};
        jpeg_read_scanlines(&cinfo, rows, 1);
        const int y = static_cast<int>(cinfo.output_scanline) - 1;
        for (int x = 0; x < frame.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                frame.at(x, y, c) = row[x * 3 + c] / 255.0;
            }
        }
    }
    jpeg_finish_decompress(&cinfo);
    const long warnings = cinfo.err->num_warnings;
    jpeg_destroy_decompress(&cinfo);
    if (warnings > 0) {
        throw FormatError("JPEG payload truncated or corrupt");
    }
    return frame;
}

// ---------------------------------------------------------------------------
// FrameSource
// ---------------------------------------------------------------------------

namespace {

bool glob_match(const std::string& name, const std::string& pattern) {
    // Iterative '*'/'?' matcher.
    std::size_t n = 0, p = 0, star = std::string::npos, star_n = 0;
    while (n < name.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
            ++n;
            ++p;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            star_n = n;
        } else if (star != std::string::npos) {
            p = star + 1;
            n = ++star_n;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

struct ParsedUrl {
    std::string host_port;  // "http://host:port"
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    if (url.rfind("http://", 0) != 0) {
        throw UsageError("only http:// URLs are supported: " + url);
    }
    const std::size_t host_start = 7;
    const std::size_t slash = url.find('/', host_start);
    ParsedUrl out;
    if (slash == std::string::npos) {
        out.host_port = url;
        out.path = "/";
    } else {
        out.host_port = url.substr(0, slash);
        out.path = url.substr(slash);
    }
    return out;
}

}  // namespace

struct FrameSource::Impl {
    // common
    std::optional<std::string> failure;
    std::size_t decode_drops = 0;

    // directory mode
    bool directory_mode = false;
    std::vector<std::filesystem::path> files;
    std::size_t next_file = 0;
    double fps = 30.0;

    // http mode
    HttpSourceSpec spec;
    std::thread reader;
    std::mutex mu;
    std::condition_variable cv;
    std::deque<Frame> queue;
    std::size_t queue_dropped = 0;
    std::atomic<bool> stop{false};
    bool reader_done = false;
    bool headers_ok = false;
    bool headers_seen = false;
    std::string header_error;
    double last_timestamp = -1.0;
    std::chrono::steady_clock::time_point t0;

    ~Impl() { shutdown(); }

    void shutdown() {
        stop.store(true);
        cv.notify_all();
        if (reader.joinable()) reader.join();
    }

    void push_frame(Frame&& frame) {
        std::lock_guard<std::mutex> lock(mu);
        // Strictly monotone timestamps, also across reconnects.
        if (frame.timestamp <= last_timestamp) {
            frame.timestamp = last_timestamp + 1e-6;
        }
        last_timestamp = frame.timestamp;
        queue.push_back(std::move(frame));
        while (queue.size() > spec.queue_depth) {
            queue.pop_front();
            ++queue_dropped;
        }
        cv.notify_all();
    }

    void run_http() {
        const ParsedUrl url = parse_url(spec.url);
        int tries_left = spec.retry.max_tries;
        double delay_ms = spec.retry.base_delay_ms;
        bool first_connection = true;

        while (!stop.load()) {
            httplib::Client client(url.host_port);
            client.set_connection_timeout(std::chrono::milliseconds(
                static_cast<int>(spec.timeout_s * 1000)));
            client.set_read_timeout(std::chrono::milliseconds(
                static_cast<int>(spec.timeout_s * 1000)));

            std::unique_ptr<MultipartParser> parser;
            std::string bad_header;
            bool delivered_this_connection = false;

            auto response_handler = [&](const httplib::Response& res) {
                if (res.status != 200) {
                    bad_header = "HTTP status " + std::to_string(res.status);
                } else {
                    const std::string ct = res.get_header_value("Content-Type");
                    try {
                        parser = std::make_unique<MultipartParser>(boundary_of_content_type(ct));
                    } catch (const Error& e) {
                        bad_header = e.what();
                    }
                }
                if (first_connection) {
                    // Unblock open() as soon as the headers are known.
                    std::lock_guard<std::mutex> lock(mu);
                    headers_seen = true;
                    headers_ok = parser != nullptr;
                    header_error = bad_header;
                    cv.notify_all();
                }
                return parser != nullptr;
            };
            auto sink = [&](const std::map<std::string, std::string>&,
                            std::vector<std::uint8_t>&& payload) {
                Frame frame;
                frame.timestamp =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                try {
                    frame.image = decode_jpeg(payload);
                } catch (const Error&) {
                    std::lock_guard<std::mutex> lock(mu);
                    ++decode_drops;
                    return;
                }
                frame.jpeg = std::move(payload);
                delivered_this_connection = true;
                push_frame(std::move(frame));
            };
            auto receiver = [&](const char* data, std::size_t size) {
                if (stop.load()) return false;
                parser->feed(reinterpret_cast<const std::uint8_t*>(data), size, sink);
                return true;
            };

            client.Get(url.path, response_handler, receiver);

            if (first_connection) {
                bool ok;
                {
                    // Covers connect failures where the handler never fired.
                    std::lock_guard<std::mutex> lock(mu);
                    headers_seen = true;
                    ok = headers_ok;
                    cv.notify_all();
                }
                first_connection = false;
                if (!ok) break;
            }
            if (stop.load()) break;
            if (!bad_header.empty() && parser == nullptr) {
                std::lock_guard<std::mutex> lock(mu);
                failure = bad_header;
                break;
            }
            if (delivered_this_connection) {
                // Fresh drop, fresh backoff budget.
                tries_left = spec.retry.max_tries;
                delay_ms = spec.retry.base_delay_ms;
            }
            if (tries_left-- <= 0) {
                std::lock_guard<std::mutex> lock(mu);
                failure = "reconnect budget exhausted after connection drop";
                break;
            }
            std::this_thread::sleep_for(
                std::chrono::milliseconds(static_cast<long>(delay_ms)));
            delay_ms *= spec.retry.factor;
        }
        std::lock_guard<std::mutex> lock(mu);
        reader_done = true;
        cv.notify_all();
    }
};

FrameSource::FrameSource() : impl_(std::make_unique<Impl>()) {}
FrameSource::FrameSource(FrameSource&&) noexcept = default;
FrameSource& FrameSource::operator=(FrameSource&&) noexcept = default;
FrameSource::~FrameSource() = default;

FrameSource FrameSource::open(const HttpSourceSpec& spec) {
    FrameSource source;
    source.impl_->spec = spec;
    source.impl_->t0 = std::chrono::steady_clock::now();
    source.impl_->reader = std::thread([impl = source.impl_.get()] { impl->run_http(); });

    // Wait for the first response headers so protocol errors surface here.
    std::unique_lock<std::mutex> lock(source.impl_->mu);
    source.impl_->cv.wait(lock, [&] {
        return source.impl_->headers_seen || source.impl_->reader_done;
    });
    if (!source.impl_->headers_ok) {
        const std::string message = source.impl_->header_error.empty()
                                        ? "could not connect to " + spec.url
                                        : source.impl_->header_error;
        lock.unlock();
        source.impl_->shutdown();
        throw FormatError(message);
    }
    return source;
}

FrameSource FrameSource::open(const DirectorySourceSpec& spec) {
    if (!std::filesystem::is_directory(spec.path)) {
        throw InputError("not a directory: " + spec.path.string());
    }
    if (!(spec.fps > 0.0)) {
        throw UsageError("directory source needs fps > 0");
    }
    FrameSource source;
    source.impl_->directory_mode = true;
    source.impl_->fps = spec.fps;
    for (const auto& entry : std::filesystem::directory_iterator(spec.path)) {
        if (!entry.is_regular_file()) continue;
        if (glob_match(entry.path().filename().string(), spec.glob)) {
            source.impl_->files.push_back(entry.path());
        }
    }
    std::sort(source.impl_->files.begin(), source.impl_->files.end());
    return source;
}

std::optional<Frame> FrameSource::next_frame() {
    if (!impl_) return std::nullopt;
    if (impl_->directory_mode) {
        while (impl_->next_file < impl_->files.size()) {
            const std::size_t index = impl_->next_file++;
            Frame frame;
            frame.timestamp = static_cast<double>(index) / impl_->fps;
            try {
                frame.image = read_png(impl_->files[index], /*gray_to_rgb=*/true);
            } catch (const Error&) {
                ++impl_->decode_drops;
                continue;
            }
            return frame;
        }
        return std::nullopt;
    }
    std::unique_lock<std::mutex> lock(impl_->mu);
    impl_->cv.wait(lock, [&] { return !impl_->queue.empty() || impl_->reader_done; });
    if (impl_->queue.empty()) return std::nullopt;
    Frame frame = std::move(impl_->queue.front());
    impl_->queue.pop_front();
    return frame;
}

void FrameSource::close() {
    if (impl_) impl_->shutdown();
}

std::size_t FrameSource::decode_drops() const {
    if (!impl_) return 0;
    if (impl_->directory_mode) return impl_->decode_drops;
    std::lock_guard<std::mutex> lock(impl_->mu);
    return impl_->decode_drops;
}

std::size_t FrameSource::queue_drops() const {
    if (!impl_ || impl_->directory_mode) return 0;
    std::lock_guard<std::mutex> lock(impl_->mu);
    return impl_->queue_dropped;
}

std::optional<std::string> FrameSource::error() const {
    if (!impl_) return std::nullopt;
    if (impl_->directory_mode) return impl_->failure;
    std::lock_guard<std::mutex> lock(impl_->mu);
    return impl_->failure;
}

RecordManifest record(FrameSource& source, const std::filesystem::path& out_dir,
                      std::size_t max_frames) {
    std::filesystem::create_directories(out_dir);
    RecordManifest manifest;
    while (manifest.delivered < max_frames) {
        auto frame = source.next_frame();
        if (!frame) break;
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%05zu.png", manifest.delivered);
        write_png(frame->image, out_dir / name);
        manifest.frames.emplace_back(name, frame->timestamp);
        ++manifest.delivered;
    }
    manifest.decode_drops = source.decode_drops();
    manifest.queue_drops = source.queue_drops();

    nlohmann::json j;
    j["frames"] = nlohmann::json::array();
    for (const auto& [file, ts] : manifest.frames) {
        j["frames"].push_back({{"file", file}, {"timestamp_s", ts}});
    }
    j["delivered"] = manifest.delivered;
    j["decode_drops"] = manifest.decode_drops;
    j["queue_drops"] = manifest.queue_drops;
    std::ofstream out(out_dir / "manifest.json");
    if (!out) {
        throw InputError("cannot write manifest in " + out_dir.string());
    }
    out << j.dump(2) << "\n";
    return manifest;
}

}  // namespace tacpalm::ingest
