//! Typed client for the losnet service.

use futures::{SinkExt, StreamExt};
use losnet_core::harness::api::{
    ErrorBody, MatrixRequest, MatrixResponse, ReplayRequest, ReplayResponse, RunRequest, RunResponse, ScenarioRef,
    ValidateRequest, ValidateResponse,
};
use losnet_core::harness::wire::{ClientFrame, ServerFrame};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("service returned {status}: {}", body.error)]
    Api { status: u16, body: ErrorBody },
    #[error("websocket: {0}")]
    Ws(#[from] tokio_tungstenite::tungstenite::Error),
    #[error("bad frame from service: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn post<B: Serialize, R: DeserializeOwned>(&self, path: &str, body: &B) -> Result<R, ClientError> {
        let resp = self.http.post(format!("{}{path}", self.base)).json(body).send().await?;
        Self::decode(resp).await
    }

    async fn decode<R: DeserializeOwned>(resp: reqwest::Response) -> Result<R, ClientError> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let text = resp.text().await?;
        let body = serde_json::from_str(&text).unwrap_or(ErrorBody { error: text, line: None });
        Err(ClientError::Api {
            status: status.as_u16(),
            body,
        })
    }

    pub async fn health(&self) -> Result<(), ClientError> {
        self.http.get(format!("{}/healthz", self.base)).send().await?.error_for_status()?;
        Ok(())
    }

    pub async fn scenarios(&self) -> Result<Vec<String>, ClientError> {
        Self::decode(self.http.get(format!("{}/v1/scenarios", self.base)).send().await?).await
    }

    pub async fn validate(&self, scenario: ScenarioRef) -> Result<ValidateResponse, ClientError> {
        self.post("/v1/validate", &ValidateRequest { scenario }).await
    }

    pub async fn run(&self, req: &RunRequest) -> Result<RunResponse, ClientError> {
        self.post("/v1/run", req).await
    }

    pub async fn matrix(&self, req: &MatrixRequest) -> Result<MatrixResponse, ClientError> {
        self.post("/v1/matrix", req).await
    }

    pub async fn replay(&self, req: &ReplayRequest) -> Result<ReplayResponse, ClientError> {
        self.post("/v1/replay", req).await
    }

    /// Opens the live session. `query` is appended verbatim, e.g.
    /// `scenario=teleop-3&speed=10`.
    pub async fn session(&self, query: &str) -> Result<SessionConn, ClientError> {
        let ws_base = self.base.replacen("http", "ws", 1);
        let url = if query.is_empty() {
            format!("{ws_base}/v1/session")
        } else {
            format!("{ws_base}/v1/session?{query}")
        };
        let (ws, _) = tokio_tungstenite::connect_async(url).await?;
        Ok(SessionConn { ws })
    }
}

/// An open live session.
pub struct SessionConn {
    ws: WebSocketStream<MaybeTlsStream<TcpStream>>,
}

impl SessionConn {
    pub async fn send(&mut self, frame: &ClientFrame) -> Result<(), ClientError> {
        self.send_raw(&serde_json::to_string(frame)?).await
    }

    pub async fn send_raw(&mut self, text: &str) -> Result<(), ClientError> {
        self.ws.send(Message::text(text)).await?;
        Ok(())
    }

    /// Next frame from the service, `None` once the session closes.
    pub async fn next_frame(&mut self) -> Result<Option<ServerFrame>, ClientError> {
        while let Some(msg) = self.ws.next().await {
            match msg? {
                Message::Text(t) => return Ok(Some(serde_json::from_str(&t)?)),
                Message::Close(_) => return Ok(None),
                _ => {}
            }
        }
        Ok(None)
    }

    pub async fn close(mut self) -> Result<(), ClientError> {
        self.ws.close(None).await?;
        Ok(())
    }
}
