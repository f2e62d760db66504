/**
 * Thin WebSocket wrapper: decodes server frames, reconnects with a fixed
 * backoff, and refuses to send while the socket is down.
 */
import { encodeFrame, parseServerFrame, type ClientFrame, type ServerFrame } from "./protocol";
import type { Connection } from "./state";

export interface SocketCallbacks {
  onFrame: (frame: ServerFrame) => void;
  onConnection: (connection: Connection) => void;
}

export class TeleopSocket {
  private ws: WebSocket | null = null;
  private closed = false;

  constructor(
    private url: string,
    private callbacks: SocketCallbacks,
    private reconnectMs = 1000,
  ) {}

  connect(): void {
    this.callbacks.onConnection("connecting");
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => this.callbacks.onConnection("open");
    this.ws.onmessage = (event: MessageEvent) => {
      const frame = parseServerFrame(String(event.data));
      if (frame) this.callbacks.onFrame(frame);
    };
    this.ws.onclose = () => {
      this.callbacks.onConnection("closed");
      if (!this.closed) {
        setTimeout(() => this.connect(), this.reconnectMs);
      }
    };
    this.ws.onerror = () => this.ws?.close();
  }

  send(frame: ClientFrame): boolean {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(encodeFrame(frame));
      return true;
    }
    return false;
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
