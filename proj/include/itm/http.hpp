#pragma once

// Eigen must come first: httplib pulls in <resolv.h>, whose `_res` macro
// collides with Eigen parameter names.
#include "itm/service.hpp"

#include <httplib.h>

namespace itm {

/// Installs the JSON routes:
///   POST   /sessions
///   GET    /sessions/{id}
///   GET    /sessions/{id}/anchors
///   GET    /sessions/{id}/groups, PATCH (edits), PUT (whole feedback)
///   POST   /sessions/{id}/recover?mode=full|partial
///   GET    /sessions/{id}/model[?full=1]
///   GET    /sessions/{id}/intrusion, POST (answers)
/// Errors come back as {"error": {"type", "message", "group"?}} with status
/// 400 (validation/parse), 404 (not found), 409 (conflict) or 500.
void register_routes(httplib::Server& server, Service& service);

}  // namespace itm
