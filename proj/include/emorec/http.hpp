#pragma once

#include "emorec/service.hpp"

#include <httplib.h>

#include <filesystem>
#include <memory>

namespace emorec {

/// Routes:
///   POST /mood, GET /recommendations, POST /feedback, GET /ledger/verify,
///   GET /metrics/requests, GET /balance, GET /catalog, GET /health
/// Files under `static_dir` (when given) are served from "/".
std::unique_ptr<httplib::Server> make_http_server(Service& service, const std::filesystem::path& static_dir = {});

}  // namespace emorec
