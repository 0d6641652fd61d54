use std::collections::VecDeque;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::TcpStream;

use super::client::Client;
use super::message::ClassicalMessage;
use crate::error::{Error, Result};

/// Ordered, reliable duplex message channel seen from one endpoint.
pub trait Channel {
    fn send(&mut self, msg: ClassicalMessage) -> Result<()>;
    fn recv(&mut self) -> Result<ClassicalMessage>;
}

/// In-process transport: the server's end of a channel whose far side is a
/// client state machine answering synchronously.
pub struct Loopback {
    client: Client,
    inbox: VecDeque<ClassicalMessage>,
    closed: bool,
    /// Every message the server sent, in order.
    pub sent: Vec<ClassicalMessage>,
    /// Every message the client sent, in order.
    pub received: Vec<ClassicalMessage>,
}

impl Loopback {
    pub fn new(client: Client) -> Self {
        Loopback {
            client,
            inbox: VecDeque::new(),
            closed: false,
            sent: Vec::new(),
            received: Vec::new(),
        }
    }

    /// Queues a message as if the client had sent it unprompted.
    pub fn push_from_client(&mut self, msg: ClassicalMessage) {
        self.inbox.push_back(msg);
    }

    pub fn close(&mut self) {
        self.closed = true;
    }

    pub fn client(&self) -> &Client {
        &self.client
    }

    pub fn client_mut(&mut self) -> &mut Client {
        &mut self.client
    }

    pub fn into_client(self) -> Client {
        self.client
    }
}

impl Channel for Loopback {
    fn send(&mut self, msg: ClassicalMessage) -> Result<()> {
        if self.closed {
            return Err(Error::ChannelClosed);
        }
        self.sent.push(msg.clone());
        let replies = self.client.handle(msg)?;
        self.inbox.extend(replies);
        Ok(())
    }

    fn recv(&mut self) -> Result<ClassicalMessage> {
        if self.closed {
            return Err(Error::ChannelClosed);
        }
        let msg = self.inbox.pop_front().ok_or(Error::ChannelClosed)?;
        self.received.push(msg.clone());
        Ok(msg)
    }
}

/// Line-delimited JSON over any byte stream.
pub struct LineChannel<R, W> {
    reader: R,
    writer: W,
    line: String,
}

impl<R: BufRead, W: Write> LineChannel<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        LineChannel {
            reader,
            writer,
            line: String::new(),
        }
    }
}

pub type TcpChannel = LineChannel<BufReader<TcpStream>, BufWriter<TcpStream>>;

impl TcpChannel {
    pub fn from_stream(stream: TcpStream) -> Result<Self> {
        stream.set_nodelay(true)?;
        let reader = BufReader::new(stream.try_clone()?);
        Ok(LineChannel::new(reader, BufWriter::new(stream)))
    }
}

impl<R: BufRead, W: Write> Channel for LineChannel<R, W> {
    fn send(&mut self, msg: ClassicalMessage) -> Result<()> {
        let line = msg.to_line()?;
        self.writer
            .write_all(line.as_bytes())
            .and_then(|()| self.writer.write_all(b"\n"))
            .and_then(|()| self.writer.flush())
            .map_err(closed_on_pipe)
    }

    fn recv(&mut self) -> Result<ClassicalMessage> {
        self.line.clear();
        let read = self.reader.read_line(&mut self.line).map_err(closed_on_pipe)?;
        if read == 0 {
            return Err(Error::ChannelClosed);
        }
        ClassicalMessage::from_line(&self.line)
    }
}

fn closed_on_pipe(e: std::io::Error) -> Error {
    use std::io::ErrorKind::*;
    match e.kind() {
        BrokenPipe | ConnectionReset | ConnectionAborted | UnexpectedEof => Error::ChannelClosed,
        _ => Error::Io(e),
    }
}
