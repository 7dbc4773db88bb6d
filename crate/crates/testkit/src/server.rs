//! A tiny local HTTP server for fetch tests.

use std::net::{SocketAddr, TcpListener};
use std::sync::Arc;
use std::thread::JoinHandle;

use tiny_http::{Header, Response, Server};

/// A canned response for `host` (any host when `None`) and `path`.
/// `{port}` in header values and bodies is replaced by the server port.
#[derive(Debug, Clone)]
pub struct Route {
    pub host: Option<String>,
    pub path: String,
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl Route {
    pub fn new(host: &str, path: &str) -> Self {
        Route { host: Some(host.into()), path: path.into(), status: 200, headers: Vec::new(), body: String::new() }
    }

    pub fn status(mut self, status: u16) -> Self {
        self.status = status;
        self
    }

    pub fn header(mut self, name: &str, value: &str) -> Self {
        self.headers.push((name.into(), value.into()));
        self
    }

    pub fn html(mut self, body: &str) -> Self {
        self.body = body.into();
        self.header("Content-Type", "text/html; charset=utf-8")
    }
}

pub struct FixtureServer {
    addr: SocketAddr,
    server: Arc<Server>,
    handle: Option<JoinHandle<()>>,
}

impl FixtureServer {
    pub fn start(routes: Vec<Route>) -> Self {
        let server = Arc::new(Server::http("127.0.0.1:0").expect("bind fixture server"));
        let addr = server.server_addr().to_ip().expect("ip listener");
        let port = addr.port().to_string();
        let worker = Arc::clone(&server);
        let handle = std::thread::spawn(move || {
            for request in worker.incoming_requests() {
                let host = request
                    .headers()
                    .iter()
                    .find(|h| h.field.equiv("Host"))
                    .map(|h| h.value.as_str().split(':').next().unwrap_or("").to_ascii_lowercase())
                    .unwrap_or_default();
                let path = request.url().split('?').next().unwrap_or("/").to_string();
                let route = routes
                    .iter()
                    .find(|r| r.path == path && r.host.as_deref().is_none_or(|h| h == host));
                let response = match route {
                    Some(r) => {
                        let mut resp =
                            Response::from_string(r.body.replace("{port}", &port)).with_status_code(r.status);
                        for (k, v) in &r.headers {
                            let v = v.replace("{port}", &port);
                            resp.add_header(Header::from_bytes(k.as_bytes(), v.as_bytes()).expect("header"));
                        }
                        resp
                    }
                    None => Response::from_string("not found").with_status_code(404),
                };
                let _ = request.respond(response);
            }
        });
        FixtureServer { addr, server, handle: Some(handle) }
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn port(&self) -> u16 {
        self.addr.port()
    }

    /// URL for `host` on this server's port.
    pub fn url(&self, host: &str, path: &str) -> String {
        format!("http://{host}:{}{path}", self.addr.port())
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

/// A loopback address with nothing listening on it.
pub fn dead_address() -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
    let addr = listener.local_addr().expect("addr");
    drop(listener);
    addr
}

/// A site whose landing page bounces through a tracker that sets a cookie,
/// then serves a page with a consent banner and a third-party image.
/// Hosts are `site.test` and `tracker.test`.
pub fn consent_site_routes() -> Vec<Route> {
    vec![
        Route::new("site.test", "/")
            .status(302)
            .header("Set-Cookie", "sid=abc123; Path=/; HttpOnly")
            .header("Location", "http://tracker.test:{port}/sync"),
        Route::new("tracker.test", "/sync")
            .status(302)
            .header("Set-Cookie", "uid=t-42; Domain=tracker.test; Max-Age=31536000")
            .header("Location", "http://site.test:{port}/home"),
        Route::new("site.test", "/home").header("Set-Cookie", "lang=fr; Path=/").html(
            r#"<html><body>
<div id="banner"><p>Ce site utilise des cookies.</p>
<button class="btn cookie-accept">Ok, tout accepter</button><a href="/refus">Refuser</a></div>
<img src="http://tracker.test:{port}/pixel.gif" width="1" height="1">
<link rel="stylesheet" href="/style.css">
</body></html>"#,
        ),
    ]
}
