/**
 * WebSocket wrapper: reconnects with backoff and asks the server to
 * resume from the last seq it saw, so a dropped connection costs nothing
 * but latency.  The UI thread never blocks on the socket.
 */

import { parseCommand, RenderCommand, serializeResume } from './protocol.js';

export interface ConnectionEvents {
    onCommand: (cmd: RenderCommand) => void;
    onStatus?: (status: 'connecting' | 'open' | 'closed') => void;
}

export class FeedConnection {
    private ws: WebSocket | null = null;
    private attempts = 0;
    private closed = false;
    lastSeq = 0;

    constructor(
        private url: string,
        private events: ConnectionEvents,
    ) {}

    connect(): void {
        if (this.closed) return;
        this.events.onStatus?.('connecting');
        this.ws = new WebSocket(this.url);
        this.ws.onopen = () => {
            this.attempts = 0;
            this.events.onStatus?.('open');
            if (this.lastSeq > 0) {
                this.ws?.send(serializeResume(this.lastSeq));
            }
        };
        this.ws.onmessage = (msg: MessageEvent) => {
            if (typeof msg.data !== 'string') return;
            const cmd = parseCommand(msg.data);
            if (cmd === null) return;
            if (cmd.seq > this.lastSeq) this.lastSeq = cmd.seq;
            this.events.onCommand(cmd);
        };
        this.ws.onclose = () => {
            this.events.onStatus?.('closed');
            this.scheduleReconnect();
        };
        this.ws.onerror = () => {
            this.ws?.close();
        };
    }

    send(raw: string): boolean {
        if (this.ws && this.ws.readyState === WebSocket.OPEN) {
            this.ws.send(raw);
            return true;
        }
        return false;
    }

    close(): void {
        this.closed = true;
        this.ws?.close();
    }

    private scheduleReconnect(): void {
        if (this.closed) return;
        const delay = Math.min(500 * 2 ** this.attempts, 10_000);
        this.attempts += 1;
        setTimeout(() => this.connect(), delay);
    }
}
