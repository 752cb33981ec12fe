#pragma once

#include <memory>
#include <string>

#include "tomigo/error.hpp"
#include "tomigo/service.hpp"

namespace httplib {
class Server;
}

namespace tomigo {

// HTTP status used for an engine error in problem-details responses.
int http_status_for(Errc code);

// Problem-details body: {"status", "code", "detail"}.
nlohmann::json problem_details(int status, std::string_view code, std::string_view detail);

// JSON REST front end over a Service. Every mutating route calls exactly one
// Service operation.
class Server {
public:
    explicit Server(Service& service);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    // Blocks until stop().
    bool listen(const std::string& host, int port);
    // Binds an ephemeral port and returns it (or -1); follow with listen_after_bind().
    int bind_to_any_port(const std::string& host);
    bool listen_after_bind();
    void wait_until_ready() const;
    void stop();

private:
    void install_routes();

    Service& service_;
    std::unique_ptr<httplib::Server> http_;
};

}  // namespace tomigo
