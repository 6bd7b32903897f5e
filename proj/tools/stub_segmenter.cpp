// Reference child process for the JSON-lines segmenter protocol. Reads one
// request per line on stdin and answers on stdout. The mode argument selects
// the behavior; the failure modes exist for exercising the client's error
// paths.
//
//   pos       echo the positive channel as the prediction (default)
//   prev      echo the previous-mask channel
//   empty     all-zero prediction of the right dimensions
//   wrongdims prediction with off-by-one dimensions
//   malformed emit a non-JSON line
//   error     emit a protocol-level error object
//   hang      read but never answer
//   die       exit(3) after the first request

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "contourkit/wire.hpp"

using namespace contourkit;

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "pos";
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        wire::WireRequest req;
        try {
            req = wire::decode_request(line);
        } catch (const std::exception& e) {
            std::cout << "{\"error\":\"bad request\"}" << std::endl;
            continue;
        }

        if (mode == "hang") {
            std::this_thread::sleep_for(std::chrono::hours(24));
        }
        if (mode == "die") {
            return 3;
        }
        if (mode == "malformed") {
            std::cout << "this is not json" << std::endl;
            continue;
        }
        if (mode == "error") {
            std::cout << "{\"id\":" << req.id << ",\"error\":\"stub failure\"}" << std::endl;
            continue;
        }

        ProbabilityMask answer(req.width, req.height);
        if (mode == "pos" && req.pos) {
            answer = ProbabilityMask::from_binary(*req.pos);
        } else if (mode == "prev" && req.prev) {
            answer = *req.prev;
        } else if (mode == "wrongdims") {
            answer = ProbabilityMask(req.width + 1, req.height);
        }
        std::cout << wire::encode_response(req.id, answer) << std::endl;
    }
    return 0;
}
