import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { FeedConnection } from '../src/connection.js';
import { RenderCommand } from '../src/protocol.js';

/** Scriptable stand-in for the browser WebSocket. */
class FakeWebSocket {
    static instances: FakeWebSocket[] = [];
    static OPEN = 1;
    readyState = 0;
    sent: string[] = [];
    onopen: (() => void) | null = null;
    onmessage: ((msg: { data: unknown }) => void) | null = null;
    onclose: (() => void) | null = null;
    onerror: (() => void) | null = null;

    constructor(public url: string) {
        FakeWebSocket.instances.push(this);
    }

    send(data: string) {
        this.sent.push(data);
    }

    close() {
        this.readyState = 3;
        this.onclose?.();
    }

    // test controls
    open() {
        this.readyState = FakeWebSocket.OPEN;
        this.onopen?.();
    }

    deliver(obj: unknown) {
        this.onmessage?.({ data: JSON.stringify(obj) });
    }
}

function command(seq: number): unknown {
    return {
        seq,
        cycle: 1,
        kind: 'insert_event',
        payload: {
            event_id: `e${seq}`, ts: 0, severity: 1, source: 's', actor: 'a',
            kind: 'k', reputation: 0, msg: '', class: 2,
        },
        style: { opacity: 0.35, pulse: false, pulse_ms: 3000 },
    };
}

describe('feed connection', () => {
    beforeEach(() => {
        FakeWebSocket.instances = [];
        vi.stubGlobal('WebSocket', FakeWebSocket);
        vi.useFakeTimers();
    });

    afterEach(() => {
        vi.unstubAllGlobals();
        vi.useRealTimers();
    });

    it('delivers parsed commands and tracks lastSeq', () => {
        const got: RenderCommand[] = [];
        const conn = new FeedConnection('ws://x/ws', { onCommand: (c) => got.push(c) });
        conn.connect();
        const ws = FakeWebSocket.instances[0];
        ws.open();
        ws.deliver(command(1));
        ws.deliver(command(2));
        ws.onmessage?.({ data: 'junk' }); // malformed: ignored
        expect(got.map((c) => c.seq)).toEqual([1, 2]);
        expect(conn.lastSeq).toBe(2);
    });

    it('reconnects after close and asks to resume from lastSeq', () => {
        const conn = new FeedConnection('ws://x/ws', { onCommand: () => undefined });
        conn.connect();
        const first = FakeWebSocket.instances[0];
        first.open();
        first.deliver(command(41));
        first.deliver(command(42));
        first.close();
        vi.advanceTimersByTime(600);
        expect(FakeWebSocket.instances).toHaveLength(2);
        const second = FakeWebSocket.instances[1];
        second.open();
        expect(second.sent).toContain(JSON.stringify({ resume_from: 42 }));
    });

    it('send is a no-op while disconnected', () => {
        const conn = new FeedConnection('ws://x/ws', { onCommand: () => undefined });
        conn.connect();
        expect(conn.send('{}')).toBe(false);
        FakeWebSocket.instances[0].open();
        expect(conn.send('{}')).toBe(true);
    });

    it('stops reconnecting once closed deliberately', () => {
        const conn = new FeedConnection('ws://x/ws', { onCommand: () => undefined });
        conn.connect();
        FakeWebSocket.instances[0].open();
        conn.close();
        vi.advanceTimersByTime(60_000);
        expect(FakeWebSocket.instances).toHaveLength(1);
    });
});
