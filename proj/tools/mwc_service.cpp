// SPDX-License-Identifier: Apache-2.0
//
// JSON-over-HTTP sensing service (/v1).

#include <iostream>

#include "mwc/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

int main(int argc, char** argv)
{
    CLI::App app{"MWC sensing service"};
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string persist;
    app.add_option("--host", host, "bind address");
    app.add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
    app.add_option("--persist-dir", persist, "directory for run records");
    CLI11_PARSE(app, argc, argv);

    mwc::ServiceOptions opt;
    if (!persist.empty()) opt.persist_dir = persist;
    mwc::SensingService service(opt);
    httplib::Server server;
    service.mount(server);
    std::cout << "listening on http://" << host << ':' << port << "/v1" << std::endl;
    if (!server.listen(host, port)) {
        std::cerr << "cannot bind " << host << ':' << port << '\n';
        return 1;
    }
    return 0;
}
