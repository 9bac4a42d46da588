import { describe, expect, it } from 'vitest';

import {
    classNameOf,
    parseCommand,
    serializeResume,
    serializeSignal,
} from '../src/protocol.js';

const INSERT = JSON.stringify({
    seq: 7,
    cycle: 3,
    kind: 'insert_event',
    payload: {
        event_id: 'e1', ts: 10, severity: 9, source: '10.21.55.120', actor: 'a1',
        kind: 'login_failure', reputation: 0.9, msg: 'failed login', class: 0, score: 0.93,
    },
    style: { opacity: 1.0, pulse: true, pulse_ms: 3000 },
});

describe('protocol', () => {
    it('parses a render command', () => {
        const cmd = parseCommand(INSERT);
        expect(cmd).not.toBeNull();
        expect(cmd!.seq).toBe(7);
        expect(cmd!.kind).toBe('insert_event');
        expect(cmd!.style.pulse).toBe(true);
    });

    it('rejects malformed input without throwing', () => {
        expect(parseCommand('')).toBeNull();
        expect(parseCommand('{"seq": "x"}')).toBeNull();
        expect(parseCommand('[1,2,3]')).toBeNull();
        expect(parseCommand('garbage {')).toBeNull();
    });

    it('fills style defaults', () => {
        const cmd = parseCommand(JSON.stringify({ seq: 1, kind: 'x', payload: {} }));
        expect(cmd!.style.opacity).toBe(1.0);
        expect(cmd!.style.pulse).toBe(false);
    });

    it('serialises signals in the gateway schema', () => {
        const raw = serializeSignal({
            scroll_velocity: 120,
            selection_active: true,
            selection: { sources: ['10.0.0.1'], actors: [], kinds: [] },
            client_ts: 5,
        });
        const parsed = JSON.parse(raw);
        expect(parsed.selection.sources).toEqual(['10.0.0.1']);
        expect(parsed.selection_active).toBe(true);
        expect(parsed.scroll_velocity).toBe(120);
    });

    it('serialises resume requests', () => {
        expect(JSON.parse(serializeResume(42))).toEqual({ resume_from: 42 });
    });

    it('maps class codes to badge names', () => {
        expect(classNameOf(0)).toBe('critical');
        expect(classNameOf(1)).toBe('warning');
        expect(classNameOf(2)).toBe('info');
        expect(classNameOf(9)).toBe('info');
    });
});
