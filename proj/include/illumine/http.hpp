#pragma once

#include "illumine/service.hpp"

#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace illumine {

/// Registers every JSON route of the engine on `server`, plus the static
/// client assets under "/" when a directory is given.
void mount_routes(httplib::Server& server, Engine& engine,
                  const std::optional<std::string>& static_dir = std::nullopt);

}  // namespace illumine
