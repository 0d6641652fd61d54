use std::net::{TcpListener, TcpStream, ToSocketAddrs};

use serde::{Deserialize, Serialize};

use super::channel::{Channel, Loopback, TcpChannel};
use super::cipher::Decryption;
use super::circuit::LogicalCircuit;
use super::client::{BranchEvent, Client};
use super::key::PermutationKey;
use super::message::ClassicalMessage;
use super::server::{EvaluationSummary, Server, ServerConfig};
use crate::css_code::{identity_code, steane_code, CssCode};
use crate::error::{Error, Result};
use crate::rng::{stream, streams};
use crate::state_sim::PureState;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeChoice {
    #[default]
    Steane,
    Identity,
}

impl CodeChoice {
    pub fn code(self) -> CssCode {
        match self {
            CodeChoice::Steane => steane_code(),
            CodeChoice::Identity => identity_code(),
        }
    }
}

impl std::str::FromStr for CodeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "steane" => Ok(CodeChoice::Steane),
            "identity" => Ok(CodeChoice::Identity),
            other => Err(Error::malformed(format!("unknown code {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transport {
    #[default]
    Inproc,
    Tcp,
}

fn default_true() -> bool {
    true
}

/// Session parameters shared by both parties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub m: usize,
    #[serde(default)]
    pub n_code: CodeChoice,
    pub seed: u64,
    #[serde(default)]
    pub noise_p: f64,
    #[serde(default)]
    pub transport: Transport,
    #[serde(default)]
    pub address: Option<String>,
    #[serde(default)]
    pub syndrome_interval: Option<usize>,
    #[serde(default = "default_true")]
    pub correct_after_transmission: bool,
}

impl SessionConfig {
    pub fn new(m: usize, n_code: CodeChoice, seed: u64) -> Self {
        SessionConfig {
            m,
            n_code,
            seed,
            noise_p: 0.0,
            transport: Transport::Inproc,
            address: None,
            syndrome_interval: None,
            correct_after_transmission: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: SessionConfig = serde_json::from_str(text).map_err(|e| Error::malformed(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::contract("m must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.noise_p) {
            return Err(Error::contract(format!("noise_p {} outside [0, 1]", self.noise_p)));
        }
        let report = self.n_code.code().validate();
        if !report.all_passed() {
            return Err(Error::contract(format!("code fails checks {:?}", report.failures())));
        }
        Ok(())
    }

    pub fn server_config(&self) -> ServerConfig {
        ServerConfig {
            correct_after_transmission: self.correct_after_transmission,
            syndrome_interval: self.syndrome_interval,
            transmission_noise: self.noise_p,
            gate_noise: 0.0,
        }
    }

    pub fn client(&self) -> Result<Client> {
        Client::new(self.n_code.code(), self.m, stream(self.seed, streams::CLIENT))
    }

    pub fn server(&self) -> Server {
        Server::new(
            self.n_code.code(),
            self.server_config(),
            stream(self.seed, streams::SERVER),
            stream(self.seed, streams::NOISE),
        )
    }
}

#[derive(Clone, Debug)]
pub struct SessionOutcome {
    pub key: PermutationKey,
    pub decryption: Decryption,
    pub branch_log: Vec<BranchEvent>,
}

/// Runs client and server in one process over a loopback channel.
pub fn run_inproc(config: &SessionConfig, circuit: &LogicalCircuit, inputs: &[PureState]) -> Result<(SessionOutcome, EvaluationSummary)> {
    config.validate()?;
    let mut client = config.client()?;
    let ciphertexts = client.encrypt_inputs(inputs)?;
    let mut channel = Loopback::new(client);
    channel.push_from_client(ClassicalMessage::QuantumTransfer { ciphertexts });
    let summary = config.server().evaluate(circuit, &mut channel)?;
    let client = channel.into_client();
    Ok((finish(&client)?, summary))
}

/// Client side of a session over any channel: sends the inputs, answers
/// until the outputs arrive, then decrypts.
pub fn drive_client<C: Channel + ?Sized>(client: &mut Client, inputs: &[PureState], channel: &mut C) -> Result<SessionOutcome> {
    let ciphertexts = client.encrypt_inputs(inputs)?;
    channel.send(ClassicalMessage::QuantumTransfer { ciphertexts })?;
    while !client.is_finished() {
        let msg = channel.recv()?;
        for reply in client.handle(msg)? {
            channel.send(reply)?;
        }
    }
    finish(client)
}

fn finish(client: &Client) -> Result<SessionOutcome> {
    Ok(SessionOutcome {
        key: client.key().clone(),
        decryption: client.decrypt_outputs()?,
        branch_log: client.branch_log().to_vec(),
    })
}

/// Accepts one client connection and evaluates `circuit` for it.
pub fn serve_one(config: &SessionConfig, circuit: &LogicalCircuit, listener: &TcpListener) -> Result<EvaluationSummary> {
    config.validate()?;
    let (stream, _) = listener.accept()?;
    let mut channel = TcpChannel::from_stream(stream)?;
    config.server().evaluate(circuit, &mut channel)
}

pub fn connect<A: ToSocketAddrs>(config: &SessionConfig, inputs: &[PureState], address: A) -> Result<SessionOutcome> {
    config.validate()?;
    let mut channel = TcpChannel::from_stream(TcpStream::connect(address)?)?;
    let mut client = config.client()?;
    drive_client(&mut client, inputs, &mut channel)
}
