//! Permutation-key homomorphic encryption over a CSS code.
//!
//! The client encodes each message qubit, spreads the `n` code qubits over `n`
//! groups of `2m` positions and fills every other position with a maximally
//! mixed qubit. The key is the slot of the code qubit in each group. Clifford
//! gates are applied transversally on all positions; T gates and syndrome
//! extraction need one classical round trip with the client.

mod channel;
mod cipher;
mod circuit;
mod client;
mod key;
mod message;
mod server;
mod session;

pub use channel::{Channel, LineChannel, Loopback, TcpChannel};
pub use cipher::{
    apply_transversal, decrypt, decrypt_blocks, encrypt, CipherBlock, Ciphertext, Decryption, DECRYPT_SWAP_CONSTANT,
};
pub use circuit::{LogicalCircuit, LogicalGate, LogicalGateKind};
pub use client::{client_interpret_and_correct, BranchEvent, Client, Interpretation, Purpose};
pub use key::{key_space_size, keygen, PermutationKey};
pub use message::{BitString, ClassicalMessage, OpString, PhysicalOp};
pub use server::{EvaluationSummary, Server, ServerConfig};
pub use session::{connect, drive_client, run_inproc, serve_one, CodeChoice, SessionConfig, SessionOutcome, Transport};
