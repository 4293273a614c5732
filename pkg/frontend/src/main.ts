import { InspectorApi } from './api';
import { App } from './app';

// served by `errlens serve --static-dir`; the API lives on the same origin
const params = new URLSearchParams(window.location.search);
const sessionId = params.get('session') ?? 's1';

const root = document.getElementById('app');
if (!root) throw new Error('missing #app container');

const app = new App(new InspectorApi('', sessionId), root);
void app.start();
