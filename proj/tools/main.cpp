// rstego - hide byte messages as coordinate references into a 4-shade grey
// reference image. The image itself is never modified; the message comes
// back only by combining the image with the coordinate payload.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rstego/rstego.hpp"

namespace {

// Exit codes: 0 success, 2 usage, 3 parse, 4 missing shade, 5 transport.
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitMissingShade = 4;
constexpr int kExitTransport = 5;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        const std::string s = buf.str();
        return std::vector<std::uint8_t>(s.begin(), s.end());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot open " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

void write_output(const std::string& path,
                  const std::vector<std::uint8_t>& bytes) {
    if (path == "-") {
        std::cout.write(reinterpret_cast<const char*>(bytes.data()),
                        std::streamsize(bytes.size()));
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw UsageError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              std::streamsize(bytes.size()));
    if (!out)
        throw UsageError("short write to " + path);
}

rstego::PaletteMode parse_mode(const std::string& name) {
    if (name == "raw")
        return rstego::PaletteMode::RawIndex;
    if (name == "match")
        return rstego::PaletteMode::MatchPalette;
    throw UsageError("palette mode must be 'raw' or 'match'");
}

// host:port for the send command
std::pair<std::string, std::uint16_t> parse_addr(const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size())
        throw UsageError("address must be host:port, got '" + addr + "'");
    const std::string host = addr.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(addr.substr(colon + 1));
    } catch (const std::exception&) {
        throw UsageError("bad port in '" + addr + "'");
    }
    if (port < 1 || port > 65535)
        throw UsageError("port out of range in '" + addr + "'");
    return {host, std::uint16_t(port)};
}

int run_convert(const std::string& in_path, const std::string& out_path,
                const std::string& mode) {
    const auto image = rstego::bmp4::parse_bmp(read_input(in_path));
    const auto ref = rstego::to_reference_image(image, parse_mode(mode));
    write_output(out_path, rstego::bmp4::write_bmp(rstego::export_grey_bmp(ref)));
    return 0;
}

int run_hide(const std::string& ref_path, const std::string& message_in,
             const std::string& payload_out, const std::string& strategy_name,
             std::optional<std::uint64_t> seed) {
    rstego::SelectionStrategy strategy;
    if (strategy_name == "first") {
        if (seed)
            throw UsageError("--seed only applies to --strategy random");
        strategy = rstego::SelectionStrategy::first();
    } else if (strategy_name == "random") {
        if (!seed)
            throw UsageError("--strategy random requires --seed");
        strategy = rstego::SelectionStrategy::random(*seed);
    } else {
        throw UsageError("strategy must be 'first' or 'random'");
    }

    // The reference is opened read-only and interpreted as raw indices,
    // matching what the receiving side does.
    const auto image = rstego::bmp4::parse_bmp(read_input(ref_path));
    const auto ref =
        rstego::to_reference_image(image, rstego::PaletteMode::RawIndex);
    const auto index = rstego::build_index(ref);

    const rstego::Message msg = read_input(message_in);
    const auto records = rstego::hide(msg, index, strategy);
    const auto payload = rstego::payload::make_payload(msg.size(), records);
    write_output(payload_out, rstego::payload::serialize(payload));
    return 0;
}

int run_unhide(const std::string& ref_path, const std::string& payload_in,
               const std::string& message_out) {
    const auto image = rstego::bmp4::parse_bmp(read_input(ref_path));
    const auto ref =
        rstego::to_reference_image(image, rstego::PaletteMode::RawIndex);
    const auto payload = rstego::payload::deserialize(read_input(payload_in));
    write_output(message_out, rstego::unhide(payload.records, ref));
    return 0;
}

int run_inspect(const std::string& path) {
    const auto bytes = read_input(path);

    if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') {
        const auto image = rstego::bmp4::parse_bmp(bytes);
        const auto ref =
            rstego::to_reference_image(image, rstego::PaletteMode::RawIndex);
        const auto index = rstego::build_index(ref);

        std::cout << "bitmap: " << image.width << "x" << image.height << ", "
                  << bytes.size() << " bytes\n";
        std::cout << "shade histogram (raw-index view):\n";
        const char* names[4] = {"black (0)", "light grey (7)", "dark grey (8)",
                                "white (15)"};
        for (int c = 0; c < 4; ++c)
            std::cout << "  code " << (c >> 1) << (c & 1) << "  "
                      << names[c] << ": " << index.bucket(std::uint8_t(c)).size()
                      << " pixels\n";
        return 0;
    }

    if (bytes.size() >= 4 && bytes[0] == 'R' && bytes[1] == 'S' &&
        bytes[2] == 'T' && bytes[3] == 'G') {
        const auto payload = rstego::payload::deserialize(bytes);
        std::cout << "payload: version " << int(payload.version)
                  << ", message length " << payload.message_length
                  << " bytes, " << payload.records.size() << " records\n";
        const std::size_t shown = std::min<std::size_t>(payload.records.size(), 8);
        for (std::size_t i = 0; i < shown; ++i)
            std::cout << "  record " << i << ": (" << payload.records[i].x
                      << ", " << payload.records[i].y << ")\n";
        if (shown < payload.records.size())
            std::cout << "  ... " << payload.records.size() - shown
                      << " more\n";
        return 0;
    }

    throw UsageError(path + " is neither a BMP image nor an RSTG payload");
}

int run_send(const std::string& image_path, const std::string& payload_path,
             const std::string& addr_a, const std::string& addr_b) {
    const auto image_bytes = read_input(image_path);
    const auto payload_bytes = read_input(payload_path);

    const auto [host_a, port_a] = parse_addr(addr_a);
    const auto [host_b, port_b] = parse_addr(addr_b);

    auto channel_a = rstego::transport::TcpChannel::connect(host_a, port_a);
    auto channel_b = rstego::transport::TcpChannel::connect(host_b, port_b);
    rstego::transport::send_session(image_bytes, payload_bytes, channel_a,
                                    channel_b);
    return 0;
}

int run_recv(std::uint16_t listen_a, std::uint16_t listen_b,
             const std::string& message_out, double timeout_seconds) {
    rstego::transport::TcpServerChannel channel_a(listen_a);
    rstego::transport::TcpServerChannel channel_b(listen_b);
    const auto timeout = std::chrono::milliseconds(
        std::llround(timeout_seconds * 1000.0));
    const rstego::Message msg =
        rstego::transport::receive_session(channel_a, channel_b, timeout);
    write_output(message_out, msg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reference-image steganography toolkit"};
    app.require_subcommand(1);

    // convert
    std::string conv_in, conv_out, conv_mode = "match";
    auto* convert = app.add_subcommand(
        "convert", "Convert a 4-bpp bitmap to a 4-shade grey reference image");
    convert->add_option("input", conv_in, "source BMP")->required();
    convert->add_option("output", conv_out, "grey reference BMP")->required();
    convert->add_option("--palette-mode", conv_mode,
                        "'match' palette entries to canonical colors, or "
                        "'raw' to use pixel indices directly");

    // hide
    std::string hide_ref, hide_in, hide_out, hide_strategy = "first";
    std::optional<std::uint64_t> hide_seed;
    auto* hide = app.add_subcommand(
        "hide", "Hide a message against a reference image");
    hide->add_option("--ref", hide_ref, "reference BMP (read-only)")->required();
    hide->add_option("--in", hide_in, "message file, or - for stdin")->required();
    hide->add_option("--out", hide_out, "payload file to write")->required();
    hide->add_option("--strategy", hide_strategy, "'first' or 'random'");
    hide->add_option("--seed", hide_seed, "seed for --strategy random");

    // unhide
    std::string un_ref, un_payload, un_out;
    auto* unhide = app.add_subcommand(
        "unhide", "Recover a message from a reference image plus payload");
    unhide->add_option("--ref", un_ref, "reference BMP")->required();
    unhide->add_option("--payload", un_payload, "payload file")->required();
    unhide->add_option("--out", un_out, "message file, or - for stdout")
        ->required();

    // inspect
    std::string inspect_path;
    auto* inspect = app.add_subcommand(
        "inspect", "Describe a BMP image or an RSTG payload");
    inspect->add_option("path", inspect_path, "file to describe")->required();

    // send
    std::string send_image, send_payload, send_addr_a, send_addr_b;
    auto* send = app.add_subcommand(
        "send", "Transmit image and payload over two separate connections");
    send->add_option("--image", send_image, "reference BMP")->required();
    send->add_option("--payload", send_payload, "payload file")->required();
    send->add_option("--addr-a", send_addr_a, "host:port for the image")
        ->required();
    send->add_option("--addr-b", send_addr_b, "host:port for the payload")
        ->required();

    // recv
    std::uint16_t recv_a = 0, recv_b = 0;
    std::string recv_out;
    double recv_timeout = 30.0;
    auto* recv = app.add_subcommand(
        "recv", "Receive both frames and recover the message");
    recv->add_option("--listen-a", recv_a, "first listening port")->required();
    recv->add_option("--listen-b", recv_b, "second listening port")->required();
    recv->add_option("--out", recv_out, "message file, or - for stdout")
        ->required();
    recv->add_option("--timeout", recv_timeout,
                     "seconds to wait for both frames (default 30)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)  // --help
            return app.exit(e);
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*convert)
            return run_convert(conv_in, conv_out, conv_mode);
        if (*hide)
            return run_hide(hide_ref, hide_in, hide_out, hide_strategy,
                            hide_seed);
        if (*unhide)
            return run_unhide(un_ref, un_payload, un_out);
        if (*inspect)
            return run_inspect(inspect_path);
        if (*send)
            return run_send(send_image, send_payload, send_addr_a, send_addr_b);
        if (*recv)
            return run_recv(recv_a, recv_b, recv_out, recv_timeout);
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "rstego: " << e.what() << "\n";
        return kExitUsage;
    } catch (const rstego::MissingShade& e) {
        std::cerr << "rstego: " << e.what() << "\n";
        return kExitMissingShade;
    } catch (const rstego::transport::Error& e) {
        std::cerr << "rstego: " << e.what() << "\n";
        return kExitTransport;
    } catch (const rstego::bmp4::Error& e) {
        std::cerr << "rstego: " << e.what() << "\n";
        return kExitParse;
    } catch (const rstego::payload::Error& e) {
        std::cerr << "rstego: " << e.what() << "\n";
        return kExitParse;
    } catch (const rstego::StegoError& e) {
        std::cerr << "rstego: " << e.what() << "\n";
        return kExitParse;
    } catch (const rstego::InvalidShade& e) {
        std::cerr << "rstego: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "rstego: " << e.what() << "\n";
        return 1;
    }
}
